"""
Tests de la contabilidad de memoria de los estados del optimizador
"""
import pytest

from ldadam.accounting import (
    LayerSpec,
    ModelSpec,
    PUBLISHED_ESTIMATES,
    compression_ratio,
    find_published,
    get_model_spec,
    layer_state_tokens,
    load_model_spec,
    memory_bytes,
    optimizer_state_tokens,
    resolve_model,
)
from ldadam.errors import ConfigurationError


# ==================== FIXTURES ====================#
@pytest.fixture
def square_layer():
    return ModelSpec(name='single', layers=[LayerSpec(name='w', n=4096, m=4096, states='projected')])


@pytest.fixture
def llama7b():
    return get_model_spec('llama2-7b')


# ==================== TESTS: TOKENS ====================#
@pytest.mark.unit
class TestStateTokens:
    """Conteo exacto de tokens de estado"""

    def test_single_square_layer(self, square_layer):
        """4096×4096 con r=32: 393 216 tokens"""
        assert optimizer_state_tokens(square_layer, 'ldadam', 32) == 393_216

    def test_adam_counts_two_states(self, square_layer):
        assert optimizer_state_tokens(square_layer, 'adam') == 2 * 4096 * 4096

    def test_compression_ratio(self, square_layer):
        ratio = optimizer_state_tokens(square_layer, 'ldadam', 32) / optimizer_state_tokens(square_layer, 'adam')
        assert ratio == pytest.approx(compression_ratio(4096, 32), rel=1e-15)

    def test_llama7b_rank32(self, llama7b):
        assert optimizer_state_tokens(llama7b, 'ldadam', 32) == 655_368_192

    def test_roberta_attention(self):
        """Atención de RoBERTa con r=8: 48·(768·8 + 2·8·768)"""
        roberta = get_model_spec('roberta-base')
        attention = next(layer for layer in roberta.layers if layer.name == 'attention')
        assert layer_state_tokens(attention, 'ldadam', 8) == 884_736

    def test_ldadam_equals_galore(self):
        for spec in ('roberta-base', 'llama-130m', 'llama-350m', 'llama2-7b'):
            model = get_model_spec(spec)
            assert optimizer_state_tokens(model, 'ldadam', 8) == optimizer_state_tokens(model, 'galore', 8)

    def test_strictly_increasing_in_rank(self, llama7b):
        counts = [optimizer_state_tokens(llama7b, 'ldadam', r) for r in (8, 32, 128, 512)]
        assert counts == sorted(counts) and len(set(counts)) == len(counts)

    def test_unprojected_layers_ignore_rank(self):
        layer = LayerSpec(name='embedding', n=10, m=3)
        assert layer_state_tokens(layer, 'ldadam', 2) == 60

    def test_rank_too_large(self):
        layer = LayerSpec(name='w', n=4, m=16, states='projected')
        with pytest.raises(ConfigurationError):
            layer_state_tokens(layer, 'ldadam', 5)

    def test_rank_required(self, square_layer):
        with pytest.raises(ConfigurationError):
            optimizer_state_tokens(square_layer, 'galore')

    def test_unknown_optimizer(self, square_layer):
        with pytest.raises(ConfigurationError):
            optimizer_state_tokens(square_layer, 'sgd', 4)


# ==================== TESTS: BYTES Y GB ====================#
@pytest.mark.unit
class TestMemoryBytes:
    """Conversión a bytes y GB con divisor 1024³"""

    def test_llama7b_rank32(self, llama7b):
        estimate = memory_bytes(optimizer_state_tokens(llama7b, 'ldadam', 32))
        assert estimate.bytes == 1_310_736_384
        assert estimate.gb == 1.22
        assert str(estimate) == "1.22 GB"

    def test_llama7b_rank512(self, llama7b):
        assert memory_bytes(optimizer_state_tokens(llama7b, 'ldadam', 512)).gb == 4.87

    def test_llama7b_adam(self, llama7b):
        assert memory_bytes(optimizer_state_tokens(llama7b, 'adam')).gb == 25.1

    def test_roberta_rank8(self):
        assert memory_bytes(optimizer_state_tokens(get_model_spec('roberta-base'), 'ldadam', 8)).gb == 0.15

    def test_llama350m_adam(self):
        assert memory_bytes(optimizer_state_tokens(get_model_spec('llama-350m'), 'adam')).gb == 1.37

    def test_zero_tokens(self):
        assert memory_bytes(0).bytes == 0

    def test_full_precision(self):
        assert memory_bytes(10, bytes_per_token=4).bytes == 40

    def test_invalid_bytes_per_token(self):
        with pytest.raises(ConfigurationError):
            memory_bytes(10, bytes_per_token=3)

    def test_reproducible_published_figures(self):
        for estimate in PUBLISHED_ESTIMATES:
            computed = memory_bytes(optimizer_state_tokens(get_model_spec(estimate.model),
                                                           estimate.optimizer, estimate.rank)).gb
            if estimate.reproducible:
                assert abs(computed - estimate.gb) <= 0.01 + 1e-9
            else:
                assert abs(computed - estimate.gb) > 0.01

    def test_find_published(self):
        assert find_published('llama2-7b', 'ldadam', 32).gb == 1.22
        assert find_published('llama2-7b', 'adam', 512).gb == 25.1
        assert find_published('llama2-7b', 'ldadam', 64) is None


# ==================== TESTS: ESPECIFICACIONES DE MODELO ====================#
@pytest.mark.unit
class TestModelSpecs:
    """Modelos integrados y cargados desde YAML"""

    def test_unknown_model(self):
        with pytest.raises(ConfigurationError):
            get_model_spec('gpt-5')

    def test_llama350m_mlp_weights(self):
        mlp = next(layer for layer in get_model_spec('llama-350m').layers if layer.name == 'mlp')
        assert mlp.weights == 24 * 3 * 1024 * 2736

    def test_load_yaml(self, tmp_path):
        path = tmp_path / 'tiny.yaml'
        path.write_text(
            "name: tiny\n"
            "layers:\n"
            "  - {name: w, n: 8, m: 16, states: projected}\n"
            "  - {name: b, n: 1, m: 16}\n",
            encoding='utf-8',
        )
        model = load_model_spec(path)
        assert optimizer_state_tokens(model, 'ldadam', 2) == 8 * 2 + 2 * 2 * 16 + 2 * 16
        assert resolve_model(str(path)).name == 'tiny'

    def test_yaml_unknown_key(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("name: bad\nlayers:\n  - {name: w, n: 2, m: 2, rank: 1}\n", encoding='utf-8')
        with pytest.raises(ConfigurationError):
            load_model_spec(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_model_spec(tmp_path / 'missing.yaml')
