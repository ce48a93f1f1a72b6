from django.core.management.base import BaseCommand

from apps.core.config import RunConfig
from apps.core.exceptions import ConfigurationError
from apps.core.utils import command_errors
from apps.harness.corpus import generate_corpus, write_corpus
from apps.harness.questions import ALL_CATEGORIES, CATEGORIES


class Command(BaseCommand):
    help = 'Generate a question corpus over synthetic scenes, with brute-force ground truth'

    def add_arguments(self, parser):
        parser.add_argument('--out', required=True, help='Corpus file to write (JSON lines)')
        parser.add_argument('--scenes', type=int, default=10, help='Number of scenes (default: 10)')
        parser.add_argument('--per-category', type=int, default=5, help='Questions per category and scene (default: 5)')
        parser.add_argument(
            '--categories', nargs='+', choices=ALL_CATEGORIES, default=list(CATEGORIES),
            help='Question categories (default: all but JointConstraint)',
        )
        parser.add_argument('--min-objects', type=int, default=3, help='Fewest objects per scene (default: 3)')
        parser.add_argument('--max-objects', type=int, default=8, help='Most objects per scene (default: 8)')
        parser.add_argument('--seed', type=int, help='Random seed')
        parser.add_argument('--config', help='Env-style file of NEPT_* settings')

    def handle(self, *args, **options):
        with command_errors():
            if options['scenes'] < 1 or options['per_category'] < 1:
                raise ConfigurationError('--scenes and --per-category must be at least 1')
            config = RunConfig.load(options['config'], seed=options['seed'])
            records, failures = generate_corpus(
                config.seed,
                options['scenes'],
                options['per_category'],
                categories=options['categories'],
                min_objects=options['min_objects'],
                max_objects=options['max_objects'],
            )
            written = write_corpus(records, options['out'])

        for failure in failures:
            self.stderr.write(f'skipped {failure.category} on {failure.scene}: {failure.error}')
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {written} questions over {options['scenes']} scenes to {options['out']} "
            f'({len(failures)} skipped)'
        ))
