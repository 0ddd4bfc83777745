import numpy as np
import numpy.testing as npt
import pytest

from oracles import central_difference, relative_error
from sdfshrink.sdf import MlpFormatError, MlpSdf, load_mlp, save_mlp


def siren(rng, widths=(3, 8, 8, 1), omega0=30.0):
    weights, biases = [], []
    for k, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        bound = 1.0 / fan_in if k == 0 else np.sqrt(6.0 / fan_in) / omega0
        weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, fan_out))
    return MlpSdf.from_arrays(weights, biases, omega0)


def test_zero_network_is_zero(rng):
    net = MlpSdf.from_arrays([np.zeros((8, 3)), np.zeros((8, 8)), np.zeros((1, 8))],
                             [np.zeros(8), np.zeros(8), np.zeros(1)])
    npt.assert_array_equal(net.eval(rng.normal(size=(10, 3))), 0.0)


def test_single_affine_layer():
    net = MlpSdf.from_arrays([np.array([[1.0, 0.0, 0.0]])], [np.zeros(1)])
    p = np.array([[0.3, -2.0, 5.0], [1.5, 0, 0]])
    npt.assert_array_equal(net.eval(p), [0.3, 1.5])
    npt.assert_array_equal(net.grad(p), [[1, 0, 0], [1, 0, 0]])


def test_forward_matches_explicit_composition(rng):
    net = siren(rng)
    p = rng.uniform(-1, 1, (5, 3))
    h = p
    for layer in net.layers[:-1]:
        h = np.sin(30.0 * (h @ layer.weight.T + layer.bias))
    expected = (h @ net.layers[-1].weight.T + net.layers[-1].bias)[:, 0]
    npt.assert_allclose(net.eval(p), expected, rtol=1e-14)


def test_gradient_matches_finite_differences(rng):
    net = siren(rng)
    p = rng.uniform(-1, 1, (50, 3))
    fd = central_difference(net.eval, p, 1e-4)
    assert relative_error(net.grad(p), fd).max() <= 1e-5


def test_load_rejects_shape_mismatch_with_layer_index(rng):
    with pytest.raises(MlpFormatError, match="layer 1"):
        MlpSdf.from_arrays([np.ones((4, 3)), np.ones((1, 5))], [np.ones(4), np.ones(1)])
    with pytest.raises(MlpFormatError, match="layer 0"):
        MlpSdf.from_arrays([np.ones((4, 2))], [np.ones(4)])


def test_file_round_trip(tmp_path, rng):
    net = siren(rng)
    save_mlp(net, tmp_path / "net.txt")
    back = load_mlp(tmp_path / "net.txt")
    p = rng.uniform(-1, 1, (20, 3))
    npt.assert_array_equal(back.eval(p), net.eval(p))
    assert [l.activation for l in back.layers] == ["sine", "sine", "linear"]


def test_omega0_defaults_to_30(tmp_path):
    (tmp_path / "net.txt").write_text(
        "sdfmlp 1\nlayers 2\n# hidden\nlayer 0\nshape 1 3\nweight 1 0 0\nbias 0\n"
        "layer 1\nshape 1 1\nweight 2\nbias 0.5\n"
    )
    net = load_mlp(tmp_path / "net.txt")
    assert net.layers[0].omega0 == 30.0
    assert net.layers[1].activation == "linear"
    assert net.eval([0.01, 0, 0])[0] == pytest.approx(2 * np.sin(0.3) + 0.5)


@pytest.mark.parametrize(
    "text, message",
    [
        ("nope\n", "header"),
        ("sdfmlp 1\nlayers 1\nlayer 0\nshape 1 3\nweight 1 0\nbias 0\n", "weights"),
        ("sdfmlp 1\nlayers 2\nlayer 0\nshape 1 3\nweight 1 0 0\nbias 0\n", "layer records"),
        ("sdfmlp 1\nlayers 1\nlayer 0\nshape 1 3\nweight 1 0 0\n", "missing"),
        ("sdfmlp 1\nlayers 1\nlayer 0\nshape 1 3\nweight 1 0 x\nbias 0\n", "layer 0"),
        ("sdfmlp 1\nlayers 1\nfoo 3\n", "line 3"),
    ],
)
def test_load_errors(tmp_path, text, message):
    (tmp_path / "net.txt").write_text(text)
    with pytest.raises(MlpFormatError, match=message):
        load_mlp(tmp_path / "net.txt")
