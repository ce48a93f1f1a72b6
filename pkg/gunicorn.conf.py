# Gunicorn configuration for the softReasoner reference grounding service

import multiprocessing
import os

# Server socket
bind = os.environ.get("GROUNDING_BIND", "127.0.0.1:8000")
backlog = 2048

# Worker processes; the service is CPU-bound scene lookup
workers = int(os.environ.get("GROUNDING_WORKERS", multiprocessing.cpu_count() + 1))
worker_class = "sync"
max_requests = 1000
max_requests_jitter = 100
timeout = 30
keepalive = 5

# Logging
accesslog = "-"
errorlog = "-"
loglevel = "info"
access_log_format = '%(h)s %(t)s "%(r)s" %(s)s %(b)s %(D)s'

# Process naming
proc_name = "soft-reasoner-grounding"

daemon = False

# Preload application code before worker processes are forked
preload_app = True

# Environment
raw_env = [
    "DJANGO_SETTINGS_MODULE=softReasoner.settings.production",
]

# Security
limit_request_line = 4094
limit_request_fields = 100
limit_request_field_size = 8190


def when_ready(server):
    """Called just after the server is started."""
    server.log.info("Grounding service is ready. Listening on %s", server.address)


def post_fork(server, worker):
    """Called just after a worker has been forked."""
    server.log.info("Worker spawned (pid: %s)", worker.pid)


def worker_abort(worker):
    """Called when a worker receives the SIGABRT signal."""
    worker.log.info("worker received SIGABRT signal")
