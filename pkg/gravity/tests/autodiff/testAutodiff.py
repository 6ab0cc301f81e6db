"""
Autodiff Tests

Ops, backward(), ADAM und AGRV-Checkpoints. Gradienten werden gegen
zentrale finite Differenzen (h = 1e-5) geprüft.
"""

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings

from gravity.exceptions import (
    CheckpointFormatError,
    MissingGradientError,
    NonScalarLossError,
    NumericalDivergenceError,
    ShapeMismatchError,
)
from gravity.services.autodiff import (
    AdamOptimizer,
    Tensor,
    backward,
    current_tape,
    forward_op,
    gradient_check,
    load_parameters,
    no_grad,
    recording,
    save_parameters,
    sgd_adam_step,
)
from gravity.services.autodiff import ops
from gravity.services.models import build_mlp_blobs


class ForwardOpTests(SimpleTestCase):

    def testReluSetztNegativeWerteAufNull(self):
        out = forward_op('relu', [Tensor([-1.0, 0.0, 2.0])])
        np.testing.assert_array_equal(out.data, [0.0, 0.0, 2.0])

    def testMatmulMitEinheitsmatrix(self):
        v = np.array([0.3, -1.2, 7.0])
        out = forward_op('matmul', [Tensor(np.eye(3)), Tensor(v)])
        np.testing.assert_array_equal(out.data, v)

    def testConv2dAufEinsen(self):
        x = Tensor(np.ones((1, 1, 3, 3)))
        w = Tensor(np.ones((1, 1, 2, 2)))
        out = forward_op('conv2d', [x, w])
        self.assertEqual(out.shape, (1, 1, 2, 2))
        np.testing.assert_array_equal(out.data, np.full((1, 1, 2, 2), 4.0))

    def testMaxpoolHalbiertDieAufloesung(self):
        x = Tensor(np.arange(16, dtype=float).reshape(1, 1, 4, 4))
        out = forward_op('maxpool2d', [x])
        np.testing.assert_array_equal(out.data[0, 0], [[5.0, 7.0], [13.0, 15.0]])

    def testSoftmaxZeilenSummierenZuEins(self):
        rng = np.random.default_rng(3)
        probs = forward_op('softmax', [Tensor(rng.normal(scale=20.0, size=(5, 7)))]).data
        self.assertTrue(np.all(probs >= 0.0))
        np.testing.assert_allclose(probs.sum(axis=1), np.ones(5), atol=1e-9)

    def testPreluNutztSteigungFuerNegativeWerte(self):
        out = forward_op('prelu', [Tensor([-2.0, 3.0]), Tensor([0.25])])
        np.testing.assert_allclose(out.data, [-0.5, 3.0])

    def testMatmulMitFalschenDimensionenNenntDieOp(self):
        with self.assertRaises(ShapeMismatchError) as ctx:
            forward_op('matmul', [Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3)))])
        self.assertEqual(ctx.exception.op, 'matmul')
        self.assertEqual(ctx.exception.shapes, [(2, 3), (2, 3)])

    def testKeinTapeEintragOhneRequiresGrad(self):
        with recording() as tape:
            forward_op('relu', [Tensor([1.0, -1.0])])
            self.assertEqual(len(tape), 0)

    def testNanGuardBrichtAb(self):
        with self.assertRaises(NumericalDivergenceError):
            forward_op('log', [Tensor([0.0, 1.0])])

    @override_settings(GRAVITY_NAN_GUARD=False)
    def testNanGuardAbschaltbar(self):
        out = forward_op('log', [Tensor([0.0, 1.0])])
        self.assertTrue(np.isneginf(out.data[0]))


class BackwardTests(SimpleTestCase):

    def testQuadratsummeHatGradientZweiX(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with recording():
            backward(ops.sum_all(ops.square(x)))
        np.testing.assert_array_equal(x.grad, [2.0, 4.0])

    def testKonstanterLossLiefertNullgradient(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with recording():
            loss = ops.sum_all(Tensor([3.0]))
            backward(loss, targets=[x])
        np.testing.assert_array_equal(x.grad, [0.0, 0.0])

    def testNichtSkalarerLossWirdAbgelehnt(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with recording():
            with self.assertRaises(NonScalarLossError):
                backward(ops.square(x))

    def testZweifacherBackwardAkkumuliertExaktDoppelt(self):
        rng = np.random.default_rng(0)
        w = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
        x = Tensor(rng.uniform(size=(4, 3)))
        with recording():
            loss = ops.mean_all(ops.square(ops.relu(ops.matmul(x, w))))
            backward(loss)
            single = w.grad.copy()
            backward(loss)
        np.testing.assert_array_equal(w.grad, 2.0 * single)

    def testMehrfachVerwendungAddiertGradienten(self):
        x = Tensor([3.0], requires_grad=True)
        with recording():
            backward(ops.sum_all(ops.mul(x, x)))
        np.testing.assert_allclose(x.grad, [6.0])

    def testNoGradZeichnetNichtsAuf(self):
        x = Tensor([1.0], requires_grad=True)
        with no_grad():
            out = ops.square(x)
        self.assertFalse(out.requires_grad)

    def testForwardOhneRecordingHinterlaesstKeinTape(self):
        model = build_mlp_blobs(2, [8, 4], 2, seed=0)
        x = np.random.default_rng(0).uniform(size=(6, 2))
        for _ in range(50):
            out = model.forward(x)
            self.assertIsNone(out._node)
            self.assertFalse(out.requires_grad)
        self.assertIsNone(current_tape())
        with recording() as tape:
            model.forward(x)
            self.assertGreater(len(tape), 0)
        self.assertIsNone(current_tape())

    def testBackwardOhneRecordingErreichtKeineParameter(self):
        w = Tensor([2.0], requires_grad=True)
        backward(ops.sum_all(ops.square(w)), targets=[w])
        np.testing.assert_array_equal(w.grad, [0.0])

    def testTargetsLassenAndereBlaetterUnberuehrt(self):
        a = Tensor([1.0, 2.0], requires_grad=True)
        b = Tensor([3.0, 4.0], requires_grad=True)
        with recording():
            backward(ops.sum_all(ops.mul(a, b)), targets=[a])
        np.testing.assert_array_equal(a.grad, [3.0, 4.0])
        self.assertIsNone(b.grad)


class GradientCheckTests(SimpleTestCase):

    def testZweiLagenNetzStimmtMitFinitenDifferenzen(self):
        rng = np.random.default_rng(11)
        x = Tensor(rng.uniform(size=(5, 4)), requires_grad=True)
        w1 = Tensor(rng.normal(size=(4, 6)), requires_grad=True, name='w1')
        b1 = Tensor(rng.normal(size=6), requires_grad=True, name='b1')
        w2 = Tensor(rng.normal(size=(6, 3)), requires_grad=True, name='w2')
        labels = np.eye(3)[rng.integers(0, 3, size=5)]

        def loss_fn():
            hidden = ops.relu(ops.add(ops.matmul(x, w1), b1))
            probs = ops.softmax(ops.matmul(hidden, w2))
            return ops.scale(ops.sum_all(ops.mul(ops.log(probs), Tensor(labels))), -1.0 / 5)

        result = gradient_check(loss_fn, [x, w1, b1, w2])
        self.assertTrue(result.passed(1e-4), result)
        self.assertEqual(result.checked_entries, 5 * 4 + 4 * 6 + 6 + 6 * 3)

    def testFaltungPoolingPreluStimmtMitFinitenDifferenzen(self):
        rng = np.random.default_rng(5)
        x = Tensor(rng.uniform(size=(2, 1, 6, 6)), requires_grad=True)
        w = Tensor(rng.normal(size=(2, 1, 3, 3)), requires_grad=True, name='conv.weight')
        b = Tensor(rng.normal(size=2), requires_grad=True, name='conv.bias')
        slope = Tensor([0.25], requires_grad=True, name='slope')
        fc = Tensor(rng.normal(size=(8, 2)), requires_grad=True, name='fc')

        def loss_fn():
            h = ops.maxpool2d(ops.prelu(ops.conv2d(x, w, b), slope))
            return ops.mean_all(ops.square(ops.matmul(ops.flatten(h), fc)))

        result = gradient_check(loss_fn, [x, w, b, slope, fc])
        self.assertTrue(result.passed(1e-4), result)

    def testZufaelligeKleineNetzeStimmenMitFinitenDifferenzen(self):
        rng = np.random.default_rng(2024)
        for trial in range(20):
            dims = [int(rng.integers(2, 9))] + [int(d) for d in rng.integers(2, 65, size=int(rng.integers(0, 3)))] \
                + [int(rng.integers(2, 6))]
            weights = [Tensor(rng.normal(size=(a, b)) / np.sqrt(a), requires_grad=True, name=f'w{i}')
                       for i, (a, b) in enumerate(zip(dims[:-1], dims[1:]))]
            biases = [Tensor(rng.normal(scale=0.1, size=b), requires_grad=True, name=f'b{i}')
                      for i, b in enumerate(dims[1:])]
            x = Tensor(self._rows_away_from_kinks(rng, dims[0], weights, biases), requires_grad=True)
            labels = Tensor(np.eye(dims[-1])[rng.integers(0, dims[-1], size=x.shape[0])])

            def loss_fn():
                h = x
                for i, (w, b) in enumerate(zip(weights, biases)):
                    h = ops.add(ops.matmul(h, w), b)
                    if i < len(weights) - 1:
                        h = ops.relu(h)
                log_probs = ops.log(ops.softmax(h))
                return ops.scale(ops.sum_all(ops.mul(log_probs, labels)), -1.0 / x.shape[0])

            with self.subTest(trial=trial, dims=dims):
                result = gradient_check(loss_fn, [x] + weights + biases)
                self.assertTrue(result.passed(1e-4), result)

    @staticmethod
    def _rows_away_from_kinks(rng, in_dim, weights, biases, margin=1e-3, rows=4):
        # finite Differenzen über einen ReLU-Knick hinweg sind kein Maßstab
        candidates = rng.uniform(size=(16, in_dim))
        keep = np.ones(len(candidates), dtype=bool)
        h = candidates
        for w, b in zip(weights[:-1], biases[:-1]):
            z = h @ w.data + b.data
            keep &= np.all(np.abs(z) > margin, axis=1)
            h = np.maximum(z, 0.0)
        return candidates[keep][:rows]


class AdamTests(SimpleTestCase):

    def _quadratic_step(self, w: Tensor, optimizer: AdamOptimizer, target: float) -> None:
        optimizer.zero_grad()
        with recording():
            backward(ops.sum_all(ops.square(ops.sub(w, Tensor([target])))))
        sgd_adam_step(optimizer)

    def testEinSchrittVerringertW(self):
        w = Tensor([1.0], requires_grad=True)
        self._quadratic_step(w, AdamOptimizer([w], lr=0.1), 0.0)
        self.assertLess(w.data[0], 1.0)

    def testNullgradientLaesstParameterUnveraendert(self):
        w = Tensor([1.5], requires_grad=True)
        w.grad = np.zeros(1)
        AdamOptimizer([w], lr=0.1).step()
        self.assertEqual(w.data[0], 1.5)

    def testKonvergiertAufQuadratischemZiel(self):
        w = Tensor([0.0], requires_grad=True)
        optimizer = AdamOptimizer([w], lr=0.1)
        for _ in range(200):
            self._quadratic_step(w, optimizer, 3.0)
        self.assertLess(abs(w.data[0] - 3.0), 0.05)

    def testFehlenderGradientWirdGemeldet(self):
        w = Tensor([1.0], requires_grad=True, name='w')
        with self.assertRaises(MissingGradientError):
            AdamOptimizer([w]).step()


class CheckpointCodecTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'params.agrv'

    def tearDown(self):
        self.tmp.cleanup()

    def testParameterBleibenBitgenauErhalten(self):
        rng = np.random.default_rng(1)
        params = {'layers.0.weight': rng.normal(size=(3, 2)), 'layers.0.bias': rng.normal(size=2)}
        save_parameters(self.path, params)
        loaded = load_parameters(self.path)
        self.assertEqual(list(loaded), list(params))
        for name in params:
            np.testing.assert_array_equal(loaded[name], params[name])

    def testHeaderBeginntMitMagic(self):
        save_parameters(self.path, {'w': np.ones(2)})
        self.assertEqual(self.path.read_bytes()[:4], b'AGRV')

    def testFalschesMagicWirdAbgelehnt(self):
        self.path.write_bytes(b'NOPE' + b'\x00' * 8)
        with self.assertRaises(CheckpointFormatError):
            load_parameters(self.path)

    def testAbgeschnitteneDateiWirdAbgelehnt(self):
        save_parameters(self.path, {'w': np.ones(4)})
        self.path.write_bytes(self.path.read_bytes()[:-8])
        with self.assertRaises(CheckpointFormatError):
            load_parameters(self.path)
