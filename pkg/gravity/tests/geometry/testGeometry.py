"""
Geometry Tests

Centroid-Extraktion, Anti-Gravity-Kräfte und Centroid-Relocation. Die
Kraftberechnung wird gegen eine unabhängige Doppelschleife geprüft.
"""

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from gravity.exceptions import AllZeroForcesError, EmptyClassError, GravityException, UnknownLabelError
from gravity.services.geometry import (
    D_FLOOR,
    CentroidSnapshot,
    ClassMass,
    ForceField,
    anti_gravity_pair,
    export_trajectories,
    extract_centroids,
    fit_pca2,
    pairwise_distances,
    read_trajectories,
    relocate,
    relocate_centroids,
    total_force,
)


def make_mass(class_id, centroid, mass=1.0, spread=None):
    centroid = np.asarray(centroid, dtype=float)
    spread = np.asarray(spread, dtype=float) if spread is not None else np.full(centroid.shape, mass / np.sqrt(centroid.size))
    return ClassMass(class_id=class_id, centroid=centroid, spread=spread, mass=float(mass), cardinality=1)


def brute_force_total(masses):
    forces = []
    for i, mi in enumerate(masses):
        force = np.zeros_like(mi.centroid)
        for j, mj in enumerate(masses):
            if i == j:
                continue
            diff = mi.centroid - mj.centroid
            d2 = max(sum(v * v for v in diff), D_FLOOR ** 2)
            force = force + (mi.mass * mj.mass / d2) * diff
        forces.append(force)
    return np.array(forces)


class ExtractCentroidsTests(SimpleTestCase):

    def testMittelwertSpreadUndMasse(self):
        masses = extract_centroids(np.array([[0.0, 0.0], [2.0, 2.0]]), np.array([0, 0]))
        np.testing.assert_allclose(masses[0].centroid, [1.0, 1.0])
        np.testing.assert_allclose(masses[0].spread, [1.0, 1.0])
        self.assertAlmostEqual(masses[0].mass, np.sqrt(2.0), places=12)
        self.assertEqual(masses[0].cardinality, 2)

    def testEinzelnesSampleHatMasseNull(self):
        masses = extract_centroids(np.array([[3.0, -1.0], [0.0, 0.0], [1.0, 1.0]]), np.array([0, 1, 1]))
        np.testing.assert_array_equal(masses[0].spread, [0.0, 0.0])
        self.assertEqual(masses[0].mass, 0.0)

    def testFehlendeKlasseWirdGemeldet(self):
        with self.assertRaises(EmptyClassError) as ctx:
            extract_centroids(np.zeros((3, 2)), np.array([0, 0, 2]), num_classes=4)
        self.assertEqual(ctx.exception.missing, [1, 3])

    def testLabelsAusserhalbDesBereichsWerdenAbgelehnt(self):
        latents = np.zeros((4, 2))
        with self.assertRaises(UnknownLabelError) as ctx:
            extract_centroids(latents, np.array([0, 1, 2, 5]), num_classes=2)
        self.assertEqual(ctx.exception.details, {'labels': [2, 5], 'num_targets': 2})
        with self.assertRaises(UnknownLabelError):
            extract_centroids(latents, np.array([0, -1, 1, 1]))

    def testAbstand345(self):
        masses = [make_mass(0, [0.0, 0.0]), make_mass(1, [3.0, 4.0])]
        distances = pairwise_distances(masses)
        self.assertEqual(distances[0, 1], 5.0)
        self.assertEqual(distances[1, 0], 5.0)
        self.assertEqual(distances[0, 0], 0.0)


class AntiGravityTests(SimpleTestCase):

    def testPaarkraftHandgerechnet(self):
        force = anti_gravity_pair(make_mass(0, [0.0, 0.0]), make_mass(1, [2.0, 0.0]))
        np.testing.assert_allclose(force, [-0.5, 0.0])

    def testMasseNullErzeugtKeineKraft(self):
        force = anti_gravity_pair(make_mass(0, [0.0, 0.0], mass=0.0), make_mass(1, [0.1, 5.0], mass=3.0))
        np.testing.assert_array_equal(force, [0.0, 0.0])

    def testPaarkraftIstAntisymmetrisch(self):
        a, b = make_mass(0, [0.3, -1.0], mass=2.0), make_mass(1, [1.5, 0.5], mass=2.0)
        np.testing.assert_allclose(anti_gravity_pair(a, b), -anti_gravity_pair(b, a))

    def testDeckungsgleicheCentroidsBleibenEndlich(self):
        force = anti_gravity_pair(make_mass(0, [1.0, 1.0]), make_mass(1, [1.0, 1.0]))
        self.assertTrue(np.all(np.isfinite(force)))

    def testZweiKlassenEntsprechenDerPaarkraft(self):
        a, b = make_mass(0, [0.0, 1.0], mass=0.5), make_mass(1, [2.0, -1.0], mass=1.5)
        field = total_force([a, b])
        np.testing.assert_allclose(field.forces[0], anti_gravity_pair(a, b), rtol=1e-12)

    def testSymmetrischeMitteErfaehrtKeineKraft(self):
        masses = [make_mass(0, [-1.0, 0.0]), make_mass(1, [0.0, 0.0]), make_mass(2, [1.0, 0.0])]
        np.testing.assert_allclose(total_force(masses).forces[1], [0.0, 0.0], atol=1e-15)

    def testVektorisiertStimmtMitDoppelschleife(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n, dim = int(rng.integers(2, 11)), int(rng.integers(1, 65))
            masses = [make_mass(i, rng.normal(size=dim) * 3.0, mass=float(rng.uniform(0.1, 2.0)))
                      for i in range(n)]
            np.testing.assert_allclose(total_force(masses).forces, brute_force_total(masses), rtol=1e-12, atol=1e-12)

    def testElementweiserModusNutztSpreadProdukt(self):
        a = make_mass(0, [0.0, 0.0], spread=[1.0, 2.0])
        b = make_mass(1, [2.0, 0.0], spread=[3.0, 0.5])
        force = anti_gravity_pair(a, b, mass_mode='elementwise')
        np.testing.assert_allclose(force, np.array([3.0, 1.0]) / 4.0 * np.array([-2.0, 0.0]))
        np.testing.assert_allclose(total_force([a, b], mass_mode='elementwise').forces[0], force)

    def testUnbekannterMassenmodus(self):
        with self.assertRaises(GravityException):
            total_force([make_mass(0, [0.0]), make_mass(1, [1.0])], mass_mode='cubic')


class RelocationTests(SimpleTestCase):

    def _two_masses(self):
        return [make_mass(0, [0.0, 0.0]), make_mass(1, [1.0, 1.0])]

    def testAlgorithmusHandgerechnet(self):
        field = ForceField(forces=np.array([[3.0, 4.0], [0.0, 0.5]]))
        relocated, steps = relocate_centroids(field, self._two_masses(), 100.0)
        self.assertEqual(field.max_force, 5.0)
        np.testing.assert_array_equal(steps, [[60.0, 80.0], [0.0, 10.0]])
        np.testing.assert_array_equal(relocated[0], [60.0, 80.0])
        np.testing.assert_array_equal(relocated[1], [1.0, 11.0])

    def testStaerksteKlasseBewegtSichUmGenauG(self):
        rng = np.random.default_rng(3)
        masses = [make_mass(i, rng.normal(size=5), mass=float(rng.uniform(0.5, 1.5))) for i in range(4)]
        _, field = relocate(masses, 7.5)
        norms = np.linalg.norm(field.steps, axis=1)
        self.assertAlmostEqual(norms.max(), 7.5, places=12)
        self.assertTrue(np.all(norms <= 7.5 + 1e-12))
        for force, step in zip(field.forces, field.steps):
            cosine = force @ step / (np.linalg.norm(force) * np.linalg.norm(step))
            self.assertAlmostEqual(cosine, 1.0, places=12)

    def testGNullLaesstCentroidsUnveraendert(self):
        masses = self._two_masses()
        relocated, _ = relocate(masses, 0.0)
        for before, after in zip(masses, relocated):
            np.testing.assert_array_equal(before.centroid, after)

    def testNurNullkraefteWerdenAbgelehnt(self):
        field = ForceField(forces=np.zeros((2, 2)))
        with self.assertRaises(AllZeroForcesError):
            relocate_centroids(field, self._two_masses(), 1.0)

    def testZweiKlassenEntfernenSichVoneinander(self):
        masses = [make_mass(0, [0.2, 0.1]), make_mass(1, [0.4, 0.5])]
        relocated, _ = relocate(masses, 0.3)
        self.assertGreater(np.linalg.norm(relocated[0] - relocated[1]),
                           np.linalg.norm(masses[0].centroid - masses[1].centroid))

    def testMassenskalierungAendertSchritteNicht(self):
        rng = np.random.default_rng(9)
        for trial in range(10):
            n = int(rng.integers(2, 7))
            masses = [make_mass(i, rng.normal(size=3), mass=float(rng.uniform(0.5, 1.5))) for i in range(n)]
            _, field = relocate(masses, 2.0)
            for factor in (0.5, 2.0, 10.0):
                with self.subTest(trial=trial, factor=factor):
                    scaled = [make_mass(m.class_id, m.centroid, mass=m.mass * factor) for m in masses]
                    _, field_scaled = relocate(scaled, 2.0)
                    np.testing.assert_allclose(field_scaled.forces, factor ** 2 * field.forces, rtol=1e-9, atol=1e-12)
                    np.testing.assert_allclose(field_scaled.steps, field.steps, rtol=0.0, atol=1e-9)


class TrajectoryExportTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        rng = np.random.default_rng(0)
        self.snapshots = [
            CentroidSnapshot(iteration=k, layer=layer, centroids=rng.normal(size=(3, 4)))
            for k in range(3) for layer in ('head', 'tail')
        ]

    def tearDown(self):
        self.tmp.cleanup()

    def testRohkoordinatenBleibenExakt(self):
        path = export_trajectories(Path(self.tmp.name) / 'traj.csv', self.snapshots)
        rows = read_trajectories(path)
        self.assertEqual(len(rows), 3 * 2 * 3)
        first = next(r for r in rows if r['iteration'] == 0 and r['layer'] == 'head' and r['class_id'] == 2)
        self.assertEqual(first['coords'], self.snapshots[0].centroids[2].tolist())

    def testPca2ProjiziertAufZweiAchsen(self):
        path = export_trajectories(Path(self.tmp.name) / 'traj_pca.csv', self.snapshots, projection='pca2')
        self.assertTrue(path.read_text().startswith('# projection: pca2'))
        rows = read_trajectories(path)
        self.assertTrue(all(len(r['coords']) == 2 for r in rows))

    def testUnbekannteProjektion(self):
        with self.assertRaises(GravityException):
            export_trajectories(Path(self.tmp.name) / 'x.csv', self.snapshots, projection='tsne')

    def testPca2FindetDieHauptachseKollinearerPunkte(self):
        direction = np.array([3.0, 0.0, -4.0]) / 5.0
        points = np.outer(np.linspace(-2.0, 2.0, 7), direction) + np.array([1.0, 1.0, 1.0])
        projection = fit_pca2(points)
        np.testing.assert_allclose(projection.components[0], [-0.6, 0.0, 0.8], atol=1e-12)
        self.assertAlmostEqual(projection.explained_variance_ratio[0], 1.0, places=12)
        np.testing.assert_allclose(projection.apply(points)[:, 0], -np.linspace(-2.0, 2.0, 7), atol=1e-12)

    def testPca2MitEinemPunktLiefertNullachsen(self):
        projection = fit_pca2(np.array([[1.0, 2.0]]))
        np.testing.assert_array_equal(projection.components, np.zeros((2, 2)))
        np.testing.assert_array_equal(projection.explained_variance_ratio, [0.0, 0.0])
