import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from offtsim import conv, core
from offtsim.core import CouplerConvention as CC

from conftest import brute_circular_conv, brute_dft2

PLANS = [CC.STANDARD, CC.PAPER_EQ1]


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_measure_real():
    assert np.allclose(conv.measure_real([1, 1j], 0.0), [1, 0])
    assert np.allclose(conv.measure_real([1, 1j], np.pi / 2), [0, 1], atol=1e-16)


def test_measure_reconstructs(rng):
    z = rng.normal(size=32) + 1j * rng.normal(size=32)
    back = conv.measure_real(z, 0) + 1j * conv.measure_real(z, np.pi / 2)
    assert np.max(np.abs(back - z)) < 1e-15


@pytest.mark.parametrize("c", PLANS)
def test_readout_e0_n2(c):
    plan = core.plan_network(2, c)
    y = conv.complex_readout(plan, [1, 0])
    assert np.allclose(y, core.transfer_matrix(plan)[:, 0], atol=1e-15)


def test_readout_real_input_real_plan():
    # a real plan with real input leaves cycle two empty
    plan = core.plan_network(2)
    y = conv.complex_readout(plan, [0.3, -1.2])
    assert np.all(y.imag == 0)


@pytest.mark.parametrize("n", [2, 8, 64])
@pytest.mark.parametrize("c", PLANS)
def test_readout_matches_propagate(n, c, rng, backend):
    plan = core.plan_network(n, c)
    x = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    y = conv.complex_readout(plan, x, backend=backend)
    assert np.max(np.abs(y - core.propagate(plan, x))) < 1e-12


def test_readout_counts_passes():
    counter = conv.PassCounter()
    plan = core.plan_network(4)
    conv.complex_readout(plan, np.ones(4), counter=counter)
    conv.complex_readout(plan, np.ones((4, 3)), counter=counter)
    assert (counter.passes, counter.readouts) == (8, 4)


def test_counter_threadsafe():
    counter = conv.PassCounter()

    def work():
        for _ in range(1000):
            counter.add(2, 1)
    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert (counter.passes, counter.readouts) == (16000, 8000)


def test_fft2d_constant_and_delta():
    plan = core.plan_network(2)
    s = conv.fft2d(plan, np.ones((2, 2)))
    assert s[0, 0] == pytest.approx(2)
    assert np.allclose(s.ravel()[1:], 0, atol=1e-15)
    plan = core.plan_network(8, CC.PAPER_EQ1)
    d = np.zeros((8, 8))
    d[0, 0] = 1
    assert np.allclose(np.abs(conv.fft2d(plan, d)), 1 / 8, atol=1e-15)


@pytest.mark.parametrize("c", PLANS)
def test_fft2d_matches_double_loop(c, rng):
    plan = core.plan_network(4, c)
    img = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.max(np.abs(conv.fft2d(plan, img) - brute_dft2(img))) < 1e-10


def test_fft2d_uses_2n_readouts():
    counter = conv.PassCounter()
    conv.fft2d(core.plan_network(8), np.ones((8, 8)), counter=counter)
    assert counter.readouts == 16 and counter.passes == 32


@pytest.mark.parametrize("c", PLANS)
def test_ifft2d(c, rng):
    plan = core.plan_network(8, c)
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    assert np.max(np.abs(conv.ifft2d(plan, conv.fft2d(plan, x)) - x)) < 1e-10
    dc = np.zeros((8, 8), complex)
    dc[0, 0] = 8
    assert np.allclose(conv.ifft2d(plan, dc), 1, atol=1e-14)
    spec = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    oracle = np.conj(brute_dft2(np.conj(spec)))
    assert np.max(np.abs(conv.ifft2d(plan, spec) - oracle)) < 1e-10


def test_fft2d_shape_check():
    with pytest.raises(core.OfftError):
        conv.fft2d(core.plan_network(4), np.ones((4, 8)))


@pytest.mark.parametrize("c", PLANS)
def test_convolve_delta_and_shift(c, rng):
    plan = core.plan_network(8, c)
    img = rng.normal(size=(8, 8))
    delta = np.zeros((8, 8))
    delta[0, 0] = 1
    assert np.max(np.abs(conv.convolve(plan, img, delta) - img)) < 1e-10
    shift = np.zeros((8, 8))
    shift[1, 0] = 1
    assert np.max(np.abs(conv.convolve(plan, img, shift) - np.roll(img, 1, axis=0))) < 1e-10


@pytest.mark.parametrize("c", PLANS)
def test_convolve_matches_quadruple_loop(c, rng, backend):
    plan = core.plan_network(8, c)
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = rng.normal(size=(8, 8))
    ref = brute_circular_conv(x, h)
    assert rel(conv.convolve(plan, x, h, backend=backend), ref) < 1e-9
    assert rel(conv.convolve(plan, x, h, precomputed_kernel=True), ref) < 1e-9


def test_convolve_quantized_is_close(rng):
    plan = core.plan_network(8)
    x, h = rng.uniform(size=(8, 8)), rng.uniform(size=(8, 8))
    err = rel(conv.convolve(plan, x, h, quant=conv.Quantization()), brute_circular_conv(x, h))
    assert 1e-6 < err < 0.1


def test_quantize_examples():
    assert conv.quantize(0.7, 1, 1.0) == 0.5
    assert conv.quantize(-0.2, 1, 1.0) == -0.5
    assert conv.quantize(5.0, 3, 1.0) == pytest.approx(0.875)
    grid = np.linspace(-1, 1, 200_001)
    q = conv.quantize(grid, 8, 1.0)
    assert np.max(np.abs(q - grid)) <= 1 / 256 + 1e-12
    with pytest.raises(core.OfftError):
        conv.quantize(0.1, 0, 1.0)
    with pytest.raises(core.OfftError):
        conv.quantize(0.1, 8, 0.0)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=50), st.integers(1, 16))
def test_quantize_idempotent(xs, bits):
    q = conv.quantize(xs, bits, 1.0)
    assert np.array_equal(conv.quantize(q, bits, 1.0), q)


def test_conv_rate():
    assert conv.conv_rate("parallel", 4, 100e9) == 3.125e9
    for n in (2, 16, 1024):
        assert conv.conv_rate("serial", n, 1e9) == conv.conv_rate("parallel", n, 1e9) / n
    for mode in ("serial", "parallel"):
        rates = [conv.conv_rate(mode, 2 ** k, 1e9) for k in range(1, 15)]
        assert all(b < a for a, b in zip(rates, rates[1:]))
    assert conv.conv_rate("parallel", 4, 100e9, frames=16) == 6.25e9
    with pytest.raises(core.OfftError):
        conv.conv_rate("parallel", 4, 0)
    with pytest.raises(core.OfftError):
        conv.conv_rate("parallel", 6, 1e9)


def test_serial_fill_latency():
    assert conv.serial_fill_latency(8, 1e9) == pytest.approx(7e-9)


def test_cnn_identity_and_relu(rng):
    plan = core.plan_network(8)
    x = rng.normal(size=(8, 8))
    delta = np.zeros((8, 8))
    delta[0, 0] = 1
    (out,) = conv.cnn_conv_layer(plan, [x], [[delta]])
    assert np.max(np.abs(out - x)) < 1e-10
    (out,) = conv.cnn_conv_layer(plan, [-np.abs(x) - 0.1], [[delta]], activation="relu")
    assert not np.any(out)


def brute_layer(inputs, kernels, bias, relu):
    outs = []
    for o, per in enumerate(kernels):
        acc = sum(brute_circular_conv(x, k) for x, k in zip(inputs, per)) + bias[o]
        outs.append(np.maximum(acc.real, 0) if relu else acc)
    return outs


@pytest.mark.parametrize("activation", ["identity", "relu"])
def test_cnn_matches_direct_layer(activation, rng):
    plan = core.plan_network(8, CC.PAPER_EQ1)
    inputs = [rng.normal(size=(8, 8)) for _ in range(2)]
    kernels = [[rng.normal(size=(8, 8)) for _ in range(2)] for _ in range(3)]
    bias = rng.normal(size=3)
    got = conv.cnn_conv_layer(plan, inputs, kernels, bias, activation)
    want = brute_layer(inputs, kernels, bias, activation == "relu")
    for g, w in zip(got, want):
        assert rel(g, w) < 1e-8


def test_cnn_argument_errors():
    plan = core.plan_network(4)
    x = [np.ones((4, 4))]
    with pytest.raises(core.OfftError):
        conv.cnn_conv_layer(plan, x, [[np.ones((4, 4))]], activation="tanh")
    with pytest.raises(core.OfftError):
        conv.cnn_conv_layer(plan, x, [])
    with pytest.raises(core.OfftError):
        conv.cnn_conv_layer(plan, x, [[np.ones((4, 4))] * 2])
    with pytest.raises(core.OfftError):
        conv.cnn_conv_layer(plan, x, [[np.ones((4, 4))]], bias=[1, 2])
