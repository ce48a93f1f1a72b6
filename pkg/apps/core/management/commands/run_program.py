import json

from django.core.management.base import BaseCommand

from apps.core.utils import add_config_arguments, command_errors, load_config, read_source, render_outcome, write_json
from apps.executor.interpreter import run
from apps.grounding.scene import Scene
from apps.programs.parser import parse_source


class Command(BaseCommand):
    help = 'Run one reasoning program against one scene and print its answer and grounding trace'

    def add_arguments(self, parser):
        parser.add_argument('program', help='Path to the program source')
        parser.add_argument('scene', help='Path to the scene document (JSON)')
        add_config_arguments(parser)

    def handle(self, *args, **options):
        with command_errors():
            config = load_config(options)
            program = parse_source(read_source(options['program']))
            scene = Scene.load(options['scene'])
            grounder = config.build_grounder(scene)
            outcome = run(program, grounder, config.exec_options())

            self.stdout.write(render_outcome(outcome))
            if outcome.gradients is not None:
                self.stdout.write(f'gradients: {json.dumps(outcome.gradients, sort_keys=True)}')
            if options['out']:
                write_json(outcome.to_dict(), options['out'])
