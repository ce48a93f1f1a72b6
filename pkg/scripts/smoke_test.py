#!/usr/bin/env python3
"""
softReasoner - Smoke Test Script
================================

Quick health checks for an installation: configuration, closed-form
operator values, a small oracle corpus round and the reference grounding
service.

Usage:
    python scripts/smoke_test.py [--verbose] [--check=all|config|operators|corpus|service]
"""

import os
import sys
import traceback
from pathlib import Path
import argparse
import time
from datetime import datetime

import django

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# Setup Django
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'softReasoner.settings.development')
django.setup()

# Django imports (must be after django.setup())
from django.conf import settings  # noqa: E402
from django.test import Client  # noqa: E402

from apps.core.config import RunConfig  # noqa: E402
from apps.harness.corpus import CorpusItem, generate_corpus  # noqa: E402
from apps.harness.metrics import evaluate  # noqa: E402
from apps.grounding.oracle import OracleGrounder  # noqa: E402
from apps.grounding.scene import Scene  # noqa: E402
from apps.tensor.logic import EQ, GT, SoftLogic, softmax  # noqa: E402

# Closed-form operator values at tau = gamma = 0.25
REFERENCE_VALUES = [
    ('Eq(1, 1)', EQ, 1.0, 1.0, 0.56218),
    ('Eq(1, 0.5)', EQ, 1.0, 0.5, 0.43782),
    ('Gt(5, 3)', GT, 5.0, 3.0, 0.57750),
    ('Gt(2, 2)', GT, 2.0, 2.0, 0.45326),
]
IOTA_REFERENCE = [0.78699, 0.10650, 0.10650]
TOLERANCE = 1e-5


class Colors:
    """ANSI color codes for terminal output."""
    HEADER = '\033[95m'
    CYAN = '\033[96m'
    GREEN = '\033[92m'
    WARNING = '\033[93m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'


class SmokeTest:
    """Main smoke test class for softReasoner."""

    def __init__(self, verbose: bool = False):
        self.verbose = verbose
        self.results = {
            'passed': 0,
            'failed': 0,
            'tests': []
        }
        self.start_time = time.time()

    def log(self, message: str, level: str = 'INFO'):
        """Log messages with color coding."""
        timestamp = datetime.now().strftime('%H:%M:%S')
        colors = {
            'INFO': Colors.CYAN,
            'SUCCESS': Colors.GREEN,
            'WARNING': Colors.WARNING,
            'ERROR': Colors.FAIL,
            'HEADER': Colors.HEADER
        }
        color = colors.get(level, Colors.ENDC)
        print(f"{color}[{timestamp}] {level}: {message}{Colors.ENDC}")

    def test_result(self, test_name: str, success: bool, message: str = ""):
        """Record test result and display."""
        if success:
            self.results['passed'] += 1
            status, color = 'PASS', Colors.GREEN
        else:
            self.results['failed'] += 1
            status, color = 'FAIL', Colors.FAIL

        self.results['tests'].append({'name': test_name, 'success': success, 'message': message})

        status_msg = f"{color}[{status}]{Colors.ENDC} {test_name}"
        if message and (self.verbose or not success):
            status_msg += f" - {message}"
        print(status_msg)

    def test_configuration(self) -> bool:
        """Test that settings load into a valid run configuration."""
        self.log("Testing Configuration", 'HEADER')
        failed_before = self.results['failed']

        self.test_result("Settings Import", True, f"Using {settings.SETTINGS_MODULE}")
        try:
            config = RunConfig.load()
            self.test_result("Run Config", True, f"grounder={config.grounder}, task={config.task}")
        except Exception as e:
            self.test_result("Run Config", False, str(e))
            return False

        for preset in settings.NEPT_GATE_PRESETS:
            try:
                RunConfig.load(gate_preset=preset).gate_params()
                self.test_result(f"Gate Preset {preset}", True)
            except Exception as e:
                self.test_result(f"Gate Preset {preset}", False, str(e))

        return self.results['failed'] == failed_before

    def test_operators(self) -> bool:
        """Test closed-form soft comparison and iota values."""
        self.log("Testing Soft Logic Operators", 'HEADER')
        failed_before = self.results['failed']
        logic = SoftLogic()

        for name, kind, lhs, rhs, expected in REFERENCE_VALUES:
            value = logic.soft_compare(kind, lhs, rhs).item()
            self.test_result(name, abs(value - expected) < TOLERANCE, f"{value:.5f} (expected {expected})")

        distribution = softmax([2.0, 0.0, 0.0]).tolist()
        close = all(abs(a - b) < TOLERANCE for a, b in zip(distribution, IOTA_REFERENCE))
        self.test_result("Iota([2, 0, 0])", close, f"{[round(p, 5) for p in distribution]}")

        return self.results['failed'] == failed_before

    def test_corpus(self) -> bool:
        """Test that the oracle grounder reproduces brute-force answers on a small corpus."""
        self.log("Testing Oracle Corpus Round", 'HEADER')
        try:
            records, failures = generate_corpus(seed=1, n_scenes=3, per_category=2)
            items = [
                CorpusItem(
                    index=i,
                    scene=Scene.from_dict(record['scene']),
                    category=record['category'],
                    task=record['task'],
                    question=record['question_text'],
                    program=record['program'],
                    ground_truth=record['ground_truth'],
                )
                for i, record in enumerate(records)
            ]
            report = evaluate(items, OracleGrounder(items[0].scene))
        except Exception as e:
            self.test_result("Corpus Round", False, str(e))
            return False

        self.test_result("Generation", not failures, f"{len(records)} questions, {len(failures)} skipped")
        self.test_result("Execution Success", report.execution_success == 100.0, f"{report.execution_success:.2f}%")
        self.test_result("Accuracy", report.accuracy == 100.0, f"{report.accuracy:.2f}%")
        return report.accuracy == 100.0 and report.execution_success == 100.0

    def test_service(self) -> bool:
        """Test the reference grounding service against a bundled scene."""
        self.log("Testing Grounding Service", 'HEADER')
        client = Client()
        scenes = sorted(Path(settings.NEPT['SCENE_DIR']).glob('*.json'))
        if not scenes:
            self.test_result("Registered Scenes", False, f"none in {settings.NEPT['SCENE_DIR']}")
            return False

        response = client.post(
            '/api/grounding/',
            {'kind': 'score', 'image_ref': scenes[0].stem, 'question': 'red', 'num_objects': 1},
            content_type='application/json',
        )
        self.test_result("Score Request", response.status_code == 200, f"HTTP {response.status_code}")
        schema = client.get('/api/schema/')
        self.test_result("OpenAPI Schema", schema.status_code == 200, f"HTTP {schema.status_code}")
        return response.status_code == 200 and schema.status_code == 200

    def run_health_check(self, check_type: str = 'all') -> bool:
        """Run the specified health checks."""
        self.log(f"Starting softReasoner Health Check - {check_type.upper()}", 'HEADER')

        checks = {
            'config': self.test_configuration,
            'operators': self.test_operators,
            'corpus': self.test_corpus,
            'service': self.test_service,
        }

        if check_type == 'all':
            selected_checks = checks.items()
        else:
            selected_checks = [(check_type, checks[check_type])] if check_type in checks else []

        if not selected_checks:
            self.log(f"Unknown check type: {check_type}", 'ERROR')
            return False

        overall_success = True
        for check_name, check_function in selected_checks:
            try:
                success = check_function()
                overall_success = overall_success and success
            except Exception as e:
                self.log(f"Check {check_name} failed with exception: {str(e)}", 'ERROR')
                if self.verbose:
                    print(traceback.format_exc())
                overall_success = False

        return overall_success

    def print_summary(self) -> None:
        """Print test execution summary."""
        duration = time.time() - self.start_time

        print(f"\n{Colors.HEADER}{'='*60}{Colors.ENDC}")
        print(f"{Colors.HEADER}softReasoner Health Check Summary{Colors.ENDC}")
        print(f"{Colors.HEADER}{'='*60}{Colors.ENDC}")

        print(f"{Colors.GREEN}Passed:{Colors.ENDC} {self.results['passed']}")
        print(f"{Colors.FAIL}Failed:{Colors.ENDC} {self.results['failed']}")
        print(f"{Colors.CYAN}Duration:{Colors.ENDC} {duration:.2f} seconds")

        if self.results['failed'] > 0:
            print(f"\n{Colors.FAIL}Failed Tests:{Colors.ENDC}")
            for test in self.results['tests']:
                if not test['success']:
                    print(f"  - {test['name']}: {test['message']}")


def main():
    """Main function to run smoke tests."""
    parser = argparse.ArgumentParser(
        description='softReasoner Smoke Test',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  python scripts/smoke_test.py --check=all --verbose
  python scripts/smoke_test.py --check=operators
        '''
    )
    parser.add_argument(
        '--check',
        default='all',
        choices=['all', 'config', 'operators', 'corpus', 'service'],
        help='Type of health check to perform (default: all)'
    )
    parser.add_argument(
        '--verbose', '-v',
        action='store_true',
        help='Enable verbose output with detailed information'
    )
    args = parser.parse_args()

    smoke_test = SmokeTest(verbose=args.verbose)

    try:
        success = smoke_test.run_health_check(args.check)
        smoke_test.print_summary()
        sys.exit(0 if success else 1)
    except KeyboardInterrupt:
        smoke_test.log("Health check interrupted by user", 'WARNING')
        sys.exit(130)


if __name__ == '__main__':
    main()
