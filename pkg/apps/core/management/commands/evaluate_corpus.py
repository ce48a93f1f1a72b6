from django.core.management.base import BaseCommand

from apps.core.utils import add_config_arguments, command_errors, load_config, write_json
from apps.harness.corpus import read_corpus
from apps.harness.metrics import evaluate
from apps.verification.services import AnswerVerifier


class Command(BaseCommand):
    help = 'Evaluate a corpus with the configured grounder and report accuracy and execution success'

    def add_arguments(self, parser):
        parser.add_argument('corpus', help='Corpus file (JSON lines)')
        add_config_arguments(parser)
        parser.add_argument(
            '--verify', action='store_true',
            help='Apply confidence gating (and the pairwise arbiter with a remote grounder)',
        )

    def handle(self, *args, **options):
        with command_errors():
            config = load_config(options)
            corpus = read_corpus(options['corpus'])
            grounder = config.build_grounder(corpus[0].scene)
            verifier = AnswerVerifier(config.gate_params()) if options['verify'] else None
            report = evaluate(corpus, grounder, config.exec_options(), verifier=verifier, jobs=config.workers)

            self.stdout.write(report.render_table())
            if options['out']:
                write_json(report.to_dict(), options['out'])
