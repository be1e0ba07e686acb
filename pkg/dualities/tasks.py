import logging

import redis
from celery import group, shared_task
from django.conf import settings

from .services.abelian_group import Bicharacter, default_bicharacter, parse_group
from .services.identity_suites import run_suite
from .services.mpo_chain import ChainConfig

logger = logging.getLogger(__name__)


def build_chain(job):
    g = parse_group(job['group'])
    chi = Bicharacter(g, job['chi']) if job.get('chi') is not None else default_bicharacter(g)
    return ChainConfig(g, chi, job['length'], job.get('cap'))


@shared_task(queue='dualitykit', bind=True)
def run_identity_suite(self, job):
    """One suite of one job; takes and returns JSON-safe dicts so it can cross the broker."""
    cfg = build_chain(job)
    logger.info('running %s suite at %s (task %s)', job['suite'], cfg, self.request.id)
    return run_suite(job['suite'], cfg, model=job.get('model', 'clock'), tol=job.get('tol'), seed=job.get('seed'))


def broker_available():
    try:
        r = redis.Redis.from_url(settings.CELERY_BROKER_URL, socket_connect_timeout=1)
        r.ping()
        return True
    except Exception:
        return False


def dispatch_suites(job, suites):
    """Reports for every suite, in the requested order, inline unless workers are configured and reachable."""
    jobs = [dict(job, suite=s) for s in suites]
    if settings.RUN_TASK_INLINE or not broker_available():
        reports = []
        for j in jobs:
            reports.extend(run_identity_suite.apply(args=[j]).get())
        return reports
    logger.info('fanning %d suites out to workers', len(jobs))
    results = group(run_identity_suite.s(j) for j in jobs).apply_async(queue='dualitykit')
    return [report for chunk in results.get() for report in chunk]
