"""
Tests for run configuration and the management commands:
run_program, generate_corpus and evaluate_corpus.
"""

import json
import os
import shutil
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from apps.core.config import RunConfig, read_config_file
from apps.core.exceptions import ConfigurationError
from apps.executor.options import REG
from apps.verification.gating import GateParams
from tests.base import PROGRAMS_DIR, SCENES_DIR

DEMO_SCENE = str(SCENES_DIR / 'demo.json')


class CommandTestCase(SimpleTestCase):
    """Runs commands with captured output inside a scratch directory."""

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def call(self, name, *args, **options):
        stdout, stderr = StringIO(), StringIO()
        call_command(name, *args, stdout=stdout, stderr=stderr, **options)
        return stdout.getvalue()

    def assertExitCode(self, code, name, *args, **options):
        with self.assertRaises(CommandError) as caught:
            self.call(name, *args, **options)
        self.assertEqual(caught.exception.returncode, code, str(caught.exception))
        return caught.exception

    def write(self, filename, text):
        path = self.tmp / filename
        path.write_text(text, encoding='utf-8')
        return str(path)

    def program(self, name):
        return str(PROGRAMS_DIR / name)


class RunConfigTest(CommandTestCase):

    def test_defaults_come_from_settings(self):
        config = RunConfig.load()
        self.assertEqual((config.grounder, config.task, config.tau, config.jobs), ('oracle', 'vqa', 0.25, 1))
        self.assertEqual(config.explicit, frozenset())

    def test_flags_override_the_config_file(self):
        path = self.write('run.env', 'NEPT_TAU=0.5\nNEPT_TASK=reg\nNEPT_SEED=7\n')
        config = RunConfig.load(path, tau=0.1, seed=None)
        self.assertEqual((config.tau, config.task, config.seed), (0.1, REG, 7))
        self.assertEqual(config.explicit, frozenset({'tau', 'task', 'seed'}))
        self.assertNotIn('NEPT_TASK', os.environ)

    def test_config_file_values_are_cast(self):
        path = self.write('run.env', 'NEPT_GRADIENTS=on\nNEPT_CALL_BUDGET=12\nNEPT_GATE_TEMP=0.3\n')
        self.assertEqual(read_config_file(path), {'gradients': True, 'call_budget': 12, 'gate_temp': 0.3})

    def test_invalid_configurations(self):
        cases = [
            {'config_file': self.write('bad.env', 'NEPT_SEED=many\n')},
            {'config_file': str(self.tmp / 'absent.env')},
            {'grounder': 'vision'},
            {'grounder': 'remote'},
            {'task': 'caption'},
            {'tau': 0.0},
            {'jobs': -1},
            {'noise': 2.0},
            {'gate_preset': 'llava'},
            {'gate_tau': 1.5},
            {'colour': 'red'},
        ]
        for kwargs in cases:
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(ConfigurationError):
                    RunConfig.load(**kwargs)

    def test_gate_presets_yield_to_explicit_values(self):
        self.assertEqual(RunConfig.load(gate_preset='qwen2vl').gate_params(), GateParams(0.70, 0.40))
        self.assertEqual(RunConfig.load(gate_preset='qwen2vl', gate_tau=0.9).gate_params(), GateParams(0.90, 0.40))
        self.assertEqual(RunConfig.load().gate_params(), GateParams(0.5, 1.0))

    def test_products(self):
        config = RunConfig.load(tau=0.5, gamma=0.1, objects=['cube'], gradients=True)
        options = config.exec_options(task=REG)
        self.assertEqual((options.task, options.gradients, options.object_names), (REG, True, ('cube',)))
        self.assertEqual((options.smoothing.tau, options.smoothing.gamma), (0.5, 0.1))
        self.assertGreaterEqual(RunConfig.load(jobs=0).workers, 1)


class RunProgramCommandTest(CommandTestCase):

    def test_yes_no_answer(self):
        out = self.call('run_program', self.program('02_exists_red_sphere.prog'), DEMO_SCENE)
        self.assertIn('answer: yes (score=1.000)', out)
        self.assertIn('grounder calls: 2', out)
        self.assertIn("2:7 score 'red' (num_objects=1) -> shape [5]", out)

    def test_structured_output(self):
        out_path = self.tmp / 'out' / 'result.json'
        self.call('run_program', self.program('03_count_cubes.prog'), DEMO_SCENE, '--gradients', '--out', str(out_path))
        result = json.loads(out_path.read_text())
        self.assertEqual(result['answer'], {'type': 'count', 'value': 2, 'raw': 2.0})
        self.assertEqual(result['gradients'], {'1:8': [1.0, 1.0, 1.0, 1.0, 1.0]})
        self.assertEqual(len(result['trace']), 1)

    def test_gradients_are_printed(self):
        out = self.call('run_program', self.program('03_count_cubes.prog'), DEMO_SCENE, gradients=True)
        self.assertIn('gradients: {"1:8": [1.0, 1.0, 1.0, 1.0, 1.0]}', out)

    def test_reg_task_from_config_file(self):
        config = self.write('reg.env', 'NEPT_TASK=reg\n')
        out = self.call('run_program', self.program('12_ref_left_of_sphere.prog'), DEMO_SCENE, '--config', config)
        self.assertIn('answer: object 0', out)
        self.assertIn('"box": [40.0, 60.0, 72.0, 72.0]', out)

    def test_exit_codes(self):
        cases = [
            (2, self.write('syntax.prog', 'return (score("red", 1)\n'), DEMO_SCENE, []),
            (3, self.write('unbound.prog', 'return missing\n'), DEMO_SCENE, []),
            (3, self.write('count.prog', 'return score("red", 1).count() & True\n'), DEMO_SCENE, []),
            (4, self.write('unknown.prog', 'return score("striped", 1).exists()\n'), DEMO_SCENE, []),
            (4, self.write('fact.prog', 'return score("flibber", 0)\n'), DEMO_SCENE, []),
            (4, self.program('01_exists_red.prog'), str(self.tmp / 'absent.json'), []),
            (5, str(self.tmp / 'absent.prog'), DEMO_SCENE, []),
            (5, self.program('01_exists_red.prog'), DEMO_SCENE, ['--grounder', 'remote']),
            (5, self.program('01_exists_red.prog'), DEMO_SCENE, ['--gate-preset', 'llava']),
        ]
        for code, program, scene, flags in cases:
            with self.subTest(program=Path(program).name, flags=flags):
                error = self.assertExitCode(code, 'run_program', program, scene, *flags)
                self.assertTrue(str(error).split(':')[0].endswith('Error'))

    def test_syntax_error_names_the_position(self):
        program = self.write('syntax.prog', 'x = 1\nreturn x &\n')
        error = self.assertExitCode(2, 'run_program', program, DEMO_SCENE)
        self.assertIn('ProgramSyntaxError: 2:11:', str(error))

    def test_object_proposal(self):
        out = self.call('run_program', self.write('count.prog', 'return score("metal", 1).count()\n'),
                        DEMO_SCENE, '--objects', 'cube')
        self.assertIn('answer: 2', out)
        self.assertIn("detect 'cube'", out)


class GenerateCorpusCommandTest(CommandTestCase):

    def generate(self, filename, *flags):
        path = self.tmp / filename
        out = self.call('generate_corpus', '--out', str(path), *flags)
        return path, out

    def test_same_seed_same_bytes(self):
        first, out = self.generate('a.jsonl', '--scenes', '3', '--per-category', '2', '--seed', '4')
        second, _ = self.generate('b.jsonl', '--scenes', '3', '--per-category', '2', '--seed', '4')
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertIn('over 3 scenes', out)
        for line in first.read_text().splitlines():
            self.assertEqual(line, json.dumps(json.loads(line), sort_keys=True))

    def test_categories(self):
        path, _ = self.generate('count.jsonl', '--scenes', '2', '--per-category', '3', '--categories', 'Count')
        categories = {json.loads(line)['category'] for line in path.read_text().splitlines()}
        self.assertEqual(categories, {'Count'})

    def test_seed_from_config_file(self):
        config = self.write('seed.env', 'NEPT_SEED=4\n')
        first, _ = self.generate('a.jsonl', '--scenes', '2', '--seed', '4')
        second, _ = self.generate('b.jsonl', '--scenes', '2', '--config', config)
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_invalid_arguments(self):
        self.assertExitCode(5, 'generate_corpus', '--out', str(self.tmp / 'x.jsonl'), '--scenes', '0')
        self.assertExitCode(5, 'generate_corpus', '--out', str(self.tmp / 'x.jsonl'), '--seed', '-3')
        self.assertExitCode(1, 'generate_corpus', '--out', str(self.tmp / 'x.jsonl'), '--min-objects', '9',
                            '--max-objects', '4')


class EvaluateCorpusCommandTest(CommandTestCase):

    def setUp(self):
        super().setUp()
        self.corpus = self.tmp / 'corpus.jsonl'
        self.call('generate_corpus', '--out', str(self.corpus), '--scenes', '4', '--per-category', '1', '--seed', '2')
        self.lines = self.corpus.read_text().splitlines()

    def evaluate(self, *flags):
        report_path = self.tmp / 'report.json'
        out = self.call('evaluate_corpus', str(self.corpus), '--out', str(report_path), *flags)
        return out, json.loads(report_path.read_text())

    def test_exact_grounding_answers_everything(self):
        out, report = self.evaluate()
        self.assertEqual(report['total'], len(self.lines))
        self.assertEqual((report['accuracy'], report['execution_success']), (100.0, 100.0))
        self.assertEqual(report['failures'], [])
        self.assertIn('overall', out)
        self.assertNotIn('verification', report)

    def test_corrupted_program(self):
        record = json.loads(self.lines[0])
        record['program'] = 'return (' + record['program']
        self.corpus.write_text('\n'.join([json.dumps(record)] + self.lines[1:]) + '\n')
        _, report = self.evaluate()
        k = len(self.lines)
        self.assertAlmostEqual(report['accuracy'], 100.0 * (k - 1) / k)
        self.assertAlmostEqual(report['execution_success'], 100.0 * (k - 1) / k)
        failure, = report['failures']
        self.assertEqual(failure['index'], 0)
        self.assertTrue(failure['error'].startswith('ProgramSyntaxError'))

    def test_verification(self):
        out, report = self.evaluate('--verify', '--gate-preset', 'internvl')
        self.assertEqual(report['verification']['accuracy_before'], 100.0)
        self.assertEqual(report['verification']['symbolic_share'], 100.0)
        self.assertIn('symbolic share', out)

    def test_parallel_evaluation(self):
        _, serial = self.evaluate()
        _, parallel = self.evaluate('--jobs', '3')
        self.assertEqual(serial['per_category'], parallel['per_category'])

    def test_noise_keeps_execution_intact(self):
        _, report = self.evaluate('--noise', '0.2', '--seed', '1')
        self.assertEqual(report['execution_success'], 100.0)

    def test_unreadable_corpus(self):
        self.assertExitCode(1, 'evaluate_corpus', str(self.tmp / 'absent.jsonl'))
