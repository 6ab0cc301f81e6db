"""
Experiment Tests

Konfigurationsvalidierung, Artefakt-Manifest und die komplette Pipeline
(train -> gravity -> select -> attack -> blackbox) auf zwei Gauß-Blobs,
sowohl über den Service als auch über das agrav Management Command.
"""

import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from gravity.exceptions import ArtifactMissingError, ConfigValidationError
from gravity.services.experiments import (
    MANIFEST_FILENAME,
    ArtifactStore,
    ExperimentPipelineService,
    load_config,
    parse_config,
)
from gravity.services.experiments.pipeline import BASELINE_CHECKPOINT
from gravity.services.metrics import read_records
from gravity.services.training import RECORDS_FILENAME


def blob_config(**overrides):
    raw = {
        'seed': 11,
        'dataset': {'kind': 'blobs', 'means': [[0.25, 0.25], [0.75, 0.75]], 'std': 0.08, 'samples_per_class': 40},
        'model': {'name': 'mlp', 'hidden_dims': [8, 4]},
        'substitute': {'name': 'mlp', 'hidden_dims': [6]},
        'baseline': {'epochs': 15, 'batch_size': 16, 'learning_rate': 1e-2},
        'gravity': {'G_head': 0.5, 'G_tail': 0.5, 'iterations': 2, 'epochs_per_iteration': 1,
                    'batch_size': 16, 'learning_rate': 1e-2},
        'selection': {'threshold': 0.5, 'attack': {'family': 'pgd', 'epsilon': 0.1, 'steps': 3}},
        'attacks': [{'family': 'fgsm', 'epsilon': 0.1}, {'family': 'pgd', 'epsilon': 0.1, 'steps': 3}],
    }
    raw.update(overrides)
    return raw


class ConfigValidationTests(SimpleTestCase):

    def testFehlendeIdxPfadeWerdenMitPfadGemeldet(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config({'seed': 0, 'dataset': {'kind': 'idx'}, 'model': {'name': 'lenet_lite'}})
        self.assertIn('dataset.train_images', ctx.exception.field_errors)
        self.assertIn('dataset.eval_labels', ctx.exception.field_errors)

    def testNegativesEpsilonInDerAngriffsliste(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config(blob_config(attacks=[{'family': 'fgsm', 'epsilon': 0.1},
                                              {'family': 'fgsm', 'epsilon': -0.1}]))
        self.assertEqual(list(ctx.exception.field_errors), ['attacks.1.epsilon'])

    def testLenetBrauchtIdxDaten(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config(blob_config(model={'name': 'lenet_lite'}))
        self.assertIn('model.name', ctx.exception.field_errors)

    def testSchwelleAusserhalbDesIntervalls(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config(blob_config(selection={'threshold': 1.0}))
        self.assertIn('selection.threshold', ctx.exception.field_errors)

    def testBimAlsTrainingsangriffWirdAbgelehnt(self):
        baseline = {'epochs': 1, 'adversarial': {'family': 'bim', 'epsilon': 0.1}}
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config(blob_config(baseline=baseline))
        self.assertIn('baseline.adversarial', ctx.exception.field_errors)

    def testDefaultsWerdenErgaenzt(self):
        raw = blob_config()
        for block in ('gravity', 'selection', 'substitute', 'attacks'):
            raw.pop(block)
        config = parse_config(raw, output_dir='/tmp/unused')
        self.assertEqual(config.gravity.G_head, 100.0)
        self.assertEqual(config.gravity.G_tail, 200.0)
        self.assertEqual(config.selection.threshold, 0.9965)
        self.assertEqual(config.selection.attack.family, 'pgd')
        self.assertEqual(config.substitute['hidden_dims'], [128, 32])
        self.assertEqual(config.attacks, [])

    def testHashIgnoriertDasAusgabeverzeichnis(self):
        a = parse_config(blob_config(), output_dir='/tmp/a')
        b = parse_config(blob_config(), output_dir='/tmp/b')
        c = parse_config(blob_config(seed=12), output_dir='/tmp/a')
        self.assertEqual(a.config_hash, b.config_hash)
        self.assertNotEqual(a.config_hash, c.config_hash)


class ShippedConfigTests(SimpleTestCase):

    def _raw(self, name):
        return json.loads((settings.BASE_DIR / 'configs' / name).read_text())

    def testBlobKonfigurationIstGueltig(self):
        config = load_config(settings.BASE_DIR / 'configs/blobs.json', output_dir='/tmp/unused')
        self.assertEqual(config.name, 'blobs')

    def testMnistKonfigurationenScheiternNurAnFehlendenDateien(self):
        for name in ('mnist.json', 'mnist_full.json'):
            with self.subTest(config=name):
                raw = self._raw(name)
                if Path(raw['dataset']['train_images']).exists():
                    self.skipTest('MNIST-Dateien liegen lokal vor')
                with self.assertRaises(ConfigValidationError) as ctx:
                    parse_config(raw, output_dir='/tmp/unused')
                self.assertTrue(all(key.startswith('dataset.') for key in ctx.exception.field_errors),
                                ctx.exception.field_errors)

    def testMnistDeskScaleIstInEinemLaufErreichbar(self):
        desk, full = self._raw('mnist.json'), self._raw('mnist_full.json')
        self.assertEqual(desk['selection']['threshold'], 0.95)
        self.assertEqual(desk['gravity']['iterations'], 10)
        self.assertEqual(desk['dataset']['train_size'], 5000)
        self.assertEqual(full['selection']['threshold'], 0.9965)
        self.assertEqual(full['gravity']['iterations'], 50)
        self.assertIsNone(full['dataset']['train_size'])


class ArtifactStoreTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def testFehlendesArtefaktNenntDieStufe(self):
        store = ArtifactStore(self.root, 'abc', '1.0.0')
        with self.assertRaises(ArtifactMissingError) as ctx:
            store.require('baseline/model.agrv', 'train')
        self.assertIn("agrav train", str(ctx.exception))

    def testVerifyErkenntVeraenderteDateien(self):
        store = ArtifactStore(self.root, 'abc', '1.0.0')
        store.write_json('a/b.json', {'x': 1})
        store.finish('test')
        self.assertEqual(store.verify(), {})
        (self.root / 'a/b.json').write_text('{"x": 2}\n')
        self.assertIn('a/b.json', store.verify())

    def testManifestWirdBeiNeuemHashNeuBegonnen(self):
        store = ArtifactStore(self.root, 'abc', '1.0.0')
        store.write_json('a.json', {})
        store.finish('test')
        self.assertIn('a.json', ArtifactStore(self.root, 'abc', '1.0.0').manifest.files)
        self.assertEqual(ArtifactStore(self.root, 'other', '1.0.0').manifest.files, {})


class PipelineTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        cls.config = parse_config(blob_config(), output_dir=cls.root)
        service = ExperimentPipelineService(cls.config)
        cls.results = {
            'train': service.train_baseline(),
            'substitute': service.train_baseline('substitute'),
            'gravity': service.gravity(),
            'select': service.select(),
            'attack': service.attack(),
            'blackbox': service.blackbox(),
        }

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def testBaselineUndSubstitutWerdenGespeichert(self):
        for relative in ('baseline/model.agrv', 'baseline/model.spec.json', 'baseline/report.json',
                         'substitute/model.agrv', 'substitute/report.json'):
            self.assertTrue((self.root / relative).exists(), relative)
        self.assertEqual(json.loads((self.root / 'substitute/report.json').read_text())['role'], 'substitute')

    def testGravitySchreibtRecordsUndCheckpoints(self):
        lines = (self.root / 'gravity/records.jsonl').read_text().splitlines()
        self.assertEqual(len(lines), 3)
        for k in range(3):
            self.assertTrue((self.root / f'gravity/checkpoints/iter_{k:03d}.agrv').exists())
        self.assertTrue((self.root / 'gravity/trajectories_pca2.csv').exists())
        self.assertEqual(self.results['gravity'].summary['iterations'], 2)

    def testAuswahlVerweistAufExistierendenCheckpoint(self):
        summary = json.loads((self.root / 'selection/summary.json').read_text())
        self.assertIn(summary['chosen_k'], summary['front'])
        self.assertTrue((self.root / summary['chosen_checkpoint']).exists())
        self.assertTrue((self.root / 'selection/pareto.csv').exists())

    def testAngriffNutztDenGewaehltenCheckpoint(self):
        chosen = self.results['select'].summary['chosen_checkpoint']
        self.assertEqual(self.results['attack'].summary['checkpoint'], chosen)
        output = self.root / self.results['attack'].outputs[0]
        with output.open() as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual([r['family'] for r in rows], ['fgsm', 'pgd'])

    def testBlackboxSchreibtTransferBericht(self):
        output = self.results['blackbox'].outputs[0]
        self.assertTrue(output.startswith('blackbox/transfer_substitute_to_'))
        reports = self.results['blackbox'].summary['reports']
        self.assertEqual(len(reports), 2)

    def testManifestEnthaeltAlleDateienMitPruefsumme(self):
        manifest = json.loads((self.root / MANIFEST_FILENAME).read_text())
        self.assertEqual(manifest['config_hash'], self.config.config_hash)
        for command in ('train:target', 'train:substitute', 'gravity', 'select', 'attack', 'blackbox'):
            self.assertIn('finished_at', manifest['commands'][command])
        for result in self.results.values():
            for output in result.outputs:
                self.assertIn(output, manifest['files'])
        store = ArtifactStore(self.root, self.config.config_hash, '1.0.0')
        self.assertEqual(store.verify(), {})

    def testGleicherSeedLiefertBytegleicheBaseline(self):
        with tempfile.TemporaryDirectory() as other:
            config = parse_config(blob_config(), output_dir=other)
            result = ExperimentPipelineService(config).train_baseline()
            self.assertEqual(result.summary['eval_accuracy'], self.results['train'].summary['eval_accuracy'])
            self.assertEqual((Path(other) / 'baseline/model.agrv').read_bytes(),
                             (self.root / 'baseline/model.agrv').read_bytes())

    def testGleicherSeedLiefertBytegleicheStufen(self):
        with tempfile.TemporaryDirectory() as other:
            service = ExperimentPipelineService(parse_config(blob_config(), output_dir=other))
            service.train_baseline()
            service.train_baseline('substitute')
            rerun = {'gravity': service.gravity(), 'select': service.select(), 'attack': service.attack(),
                     'blackbox': service.blackbox()}
            for stage, result in rerun.items():
                with self.subTest(stage=stage):
                    self.assertEqual(result.outputs, self.results[stage].outputs)
                    for output in result.outputs:
                        self.assertEqual((Path(other) / output).read_bytes(), (self.root / output).read_bytes(), output)

    def testGravityOhneBaselineMeldetFehlendesArtefakt(self):
        with tempfile.TemporaryDirectory() as other:
            service = ExperimentPipelineService(parse_config(blob_config(), output_dir=other))
            with self.assertRaises(ArtifactMissingError):
                service.gravity()

    def testUnbekannteRolle(self):
        with self.assertRaises(ConfigValidationError):
            ExperimentPipelineService(self.config).train_baseline('shadow')


class GravityEffectTests(SimpleTestCase):
    """Kaum trainierte Baseline, danach kräftige Gravity-Iterationen."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        raw = blob_config(
            seed=0,
            dataset={'kind': 'blobs', 'means': [[0.3, 0.3], [0.7, 0.7]], 'std': 0.1, 'samples_per_class': 150},
            model={'name': 'mlp', 'hidden_dims': [16, 8]},
            substitute={'name': 'mlp', 'hidden_dims': [12]},
            baseline={'epochs': 1, 'batch_size': 32, 'learning_rate': 1e-3},
            gravity={'G_head': 1.0, 'G_tail': 1.0, 'iterations': 3, 'epochs_per_iteration': 5,
                     'batch_size': 32, 'learning_rate': 1e-2},
            selection={'threshold': 0.75, 'attack': {'family': 'pgd', 'epsilon': 0.1, 'steps': 5}},
            attacks=[{'family': 'fgsm', 'epsilon': 0.1}, {'family': 'bim', 'epsilon': 0.1, 'steps': 5},
                     {'family': 'mim', 'epsilon': 0.1, 'steps': 5}, {'family': 'pgd', 'epsilon': 0.1, 'steps': 5}],
        )
        service = ExperimentPipelineService(parse_config(raw, output_dir=cls.root))
        service.train_baseline()
        service.train_baseline('substitute')
        service.gravity()
        service.select()
        cls.baseline_reports = service.attack(BASELINE_CHECKPOINT).summary['reports']
        cls.chosen_reports = service.attack().summary['reports']
        cls.transfer_reports = service.blackbox().summary['reports']
        cls.records = read_records(cls.root / 'gravity' / RECORDS_FILENAME)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def testHeadAbstandWaechstInDerErstenIteration(self):
        self.assertGreater(self.records[1].icd['head'].avg, self.records[0].icd['head'].avg)

    def testGewaehltesModellIstGegenFgsmMindestensSoRobustWieDieBaseline(self):
        baseline = next(r for r in self.baseline_reports if r['family'] == 'fgsm')
        chosen = next(r for r in self.chosen_reports if r['family'] == 'fgsm')
        self.assertGreaterEqual(chosen['robust_acc'], baseline['robust_acc'])

    def testTransferTaeuschtHoechstensSoOftWieWhiteBox(self):
        for white, transfer in zip(self.chosen_reports, self.transfer_reports):
            with self.subTest(family=white['family']):
                self.assertEqual(white['family'], transfer['family'])
                self.assertLessEqual(transfer['fooling_rate'], white['fooling_rate'])


class AgravCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.config_path = self.root / 'blobs.json'
        self.config_path.write_text(json.dumps(blob_config()))

    def tearDown(self):
        self.tmp.cleanup()

    def _call(self, *args, **options):
        stdout = StringIO()
        call_command('agrav', *args, config=str(self.config_path), out=str(self.root / 'run'), stdout=stdout,
                     **options)
        return stdout.getvalue()

    def testTrainUndAttackUeberDasKommando(self):
        output = self._call('train')
        self.assertIn('baseline/model.agrv', output)
        self.assertIn('erfolgreich', output)
        output = self._call('attack')
        self.assertIn('attack/robustness_baseline.csv', output)

    def testUngueltigeKonfigurationEndetMitCodeEins(self):
        self.config_path.write_text(json.dumps({'seed': 0}))
        with self.assertRaises(CommandError) as ctx:
            self._call('train')
        self.assertEqual(ctx.exception.returncode, 1)

    def testFehlendeKonfigurationsdateiEndetMitCodeEins(self):
        self.config_path.unlink()
        with self.assertRaises(CommandError) as ctx:
            self._call('train')
        self.assertEqual(ctx.exception.returncode, 1)

    def testFehlendesArtefaktEndetMitCodeZwei(self):
        with self.assertRaises(CommandError) as ctx:
            self._call('select')
        self.assertEqual(ctx.exception.returncode, 2)

    def testKaputteModellSpecEndetMitCodeZwei(self):
        self._call('train')
        (self.root / 'run/baseline/model.spec.json').write_text('{not json')
        with self.assertRaises(CommandError) as ctx:
            self._call('attack')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('CheckpointFormatError', str(ctx.exception))
