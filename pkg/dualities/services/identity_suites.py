import itertools
import logging

import numpy as np
from django.conf import settings

from dualities.exceptions import UnsupportedChainError
from dualities.services.center_channels import compose_channels, extreme_channels
from dualities.services.mpo_chain import (
    HamiltonianSpec,
    IdentityReport,
    build_duality_mpo,
    build_hamiltonian,
    build_symmetry_mpo,
    build_translation_mpo,
    build_word_mpo,
    check_self_duality,
    contract,
    dense_product,
    discover_word,
    double_duality_shift,
    f_symbol_scalar,
    find_intertwiner,
    fit_decomposition,
    identity_mpo,
    json_scalar,
    qca_generator_map,
    shift_matrix,
    translation_operator,
    verify_identity,
    word_name,
)

logger = logging.getLogger(__name__)

SUITES = ('fusion', 'selfdual', 'qca', 'intertwiner')

# bond dimension above which F-scalar triples are skipped
MAX_WORD_BOND = 16

# on two sites P^ZZ_0 and P^ZZ_1 coincide
QCA_MIN_LENGTH = 4


def _report(cfg, name, max_error, passed, scale=None, **detail):
    return IdentityReport(name, cfg.length, str(cfg.group), float(max_error), scale, bool(passed), detail).as_dict()


def fusion_suite(cfg, tol_exact, tol_eigen, seed=None):
    group = cfg.group
    d_plus = build_duality_mpo(cfg, '+')
    d_minus = build_duality_mpo(cfg, '-')
    t_plus = build_translation_mpo(cfg, '+')
    t_minus = build_translation_mpo(cfg, '-')
    reports = []

    for g in group.elements[1:]:
        eta = build_symmetry_mpo(cfg, g)
        reports.append(verify_identity(cfg, f'D+{g} = D+', [d_plus, eta], d_plus, tol_exact).as_dict())
        reports.append(verify_identity(cfg, f'{g}D+ = D+', [eta, d_plus], d_plus, tol_exact).as_dict())
        dressed = build_translation_mpo(cfg, '+', dressed_by=g)
        reports.append(verify_identity(cfg, f'{g}T+ = {g}.T+', dressed, [eta, t_plus], tol_exact).as_dict())

    words = [build_word_mpo(cfg, g, 1) for g in group.elements]
    grade_two = sum(contract(w, cfg.cap) for w in words)
    rhs_name = ' + '.join(word_name(group, g, 1) for g in group.elements)
    reports.append(verify_identity(cfg, f'D+^2 = {rhs_name}', [d_plus, d_plus], grade_two, tol_eigen).as_dict())
    reports.append(verify_identity(cfg, 'D- = D+T-', d_minus, [d_plus, t_minus], tol_exact).as_dict())
    reports.append(verify_identity(cfg, 'T+ = cyclic shift', t_plus, translation_operator(cfg, 1), tol_exact).as_dict())
    reports.append(verify_identity(cfg, 'T+T- = 1', [t_plus, t_minus], identity_mpo(cfg), tol_exact).as_dict())

    for name, factors in (('D+D-', [d_plus, d_minus]), ('D-D+', [d_minus, d_plus])):
        found = discover_word(cfg, dense_product(factors, cfg.cap), tol_eigen)
        word, scale = found if found else (None, None)
        reports.append(_report(cfg, f'{name} = {word}', 0.0, found is not None, json_scalar(scale), word=word))

    dense = contract(d_plus, cfg.cap)
    rank = int(np.linalg.matrix_rank(dense, tol=tol_eigen))
    expected = cfg.dimension // group.order
    reports.append(_report(cfg, 'rank(D+) < |A|^L', 0.0, rank == expected < cfg.dimension,
                           rank=rank, expected=expected, dimension=cfg.dimension))

    # projecting D+^2 onto the grade-two words must reproduce the channel composition weights
    weights, residual = fit_decomposition(dense @ dense, [contract(w, cfg.cap) for w in words], tol_eigen)
    duality = extreme_channels(cfg.chi, 1, seed=seed)[0]
    mixture = compose_channels(cfg.chi, duality, duality, seed=seed).coefficients
    measured = {word_name(group, g, 1): float(w.real) for g, w in zip(group.elements, weights)}
    error = max(abs(measured[k] - mixture.get(k, 0.0)) for k in measured)
    reports.append(_report(cfg, 'D+^2 weights = D+ o D+ channel weights', max(error, residual),
                           max(error, residual) <= 1e-8, measured=measured, channel=mixture))
    return reports


def selfdual_suite(cfg, model, tol_exact, tol_eigen):
    if model == 'cluster' and cfg.group.factors != (2, 2):
        raise UnsupportedChainError(f'The cluster model needs --group Z2xZ2, got {cfg.group}')
    H = build_hamiltonian(cfg, HamiltonianSpec(model))
    reports = []
    for g in cfg.group.elements[1:]:
        eta = contract(build_symmetry_mpo(cfg, g), cfg.cap)
        error = float(np.max(np.abs(eta @ H - H @ eta)))
        reports.append(_report(cfg, f'[{g}, H_{model}] = 0', error, error <= tol_exact))
    result = check_self_duality(cfg, build_duality_mpo(cfg, '+'), H, tol_eigen)
    reports.append(_report(cfg, f'[D+, H_{model}] = 0', result['exact_error'], result['pass'],
                           variant=result['variant'], translated=result['translated']))
    return reports


def qca_suite(cfg, tol_eigen):
    result = qca_generator_map(cfg, tol_eigen)
    reports = [_report(cfg, 'alpha permutes symmetric generators', result['multiplicative_error'], result['pass'],
                       generators=result['generators'], spread=result['spread'], bijective=result['bijective'])]
    for g in cfg.group.elements[1:]:
        shift = double_duality_shift(cfg, g, 0, tol_eigen)
        reports.append(_report(cfg, f'alpha^2(X_{g}) = translated X_{g}', shift['error'], shift['pass'],
                               offset=shift['offset']))
    return reports


def intertwiner_suite(cfg, tol_exact):
    group = cfg.group
    t_plus = build_translation_mpo(cfg, '+')
    t_minus = build_translation_mpo(cfg, '-')
    reports = []

    for g in group.elements[1:]:
        found = find_intertwiner(build_word_mpo(cfg, g, 1), t_plus, build_symmetry_mpo(cfg, g), tol_exact)
        if found is None:
            reports.append(_report(cfg, f'T+{g} -> {g}T+', float('inf'), False, nullity=0))
            continue
        error = float(np.max(np.abs(found.matrix - shift_matrix(group, g))))
        reports.append(_report(cfg, f'T+{g} -> {g}T+', error, found.unique and error <= tol_exact,
                               nullity=found.nullity))

    if cfg.length % 2 == 0:
        d_plus = build_duality_mpo(cfg, '+')
        found = find_intertwiner(t_plus, d_plus, d_plus, tol_exact)
        reports.append(_report(cfg, 'D+D+ -> T+', 0.0, bool(found and found.unique),
                               nullity=found.nullity if found else 0))
    found = find_intertwiner(identity_mpo(cfg), t_plus, t_minus, tol_exact)
    reports.append(_report(cfg, 'T+T- -> 1', 0.0, bool(found and found.unique), nullity=found.nullity if found else 0))

    # a backward word after a forward one has no local intertwiner, so each family moves one way
    charge = [(group.elements[1], 0)] if group.order > 1 else []
    triples = []
    for k in (1, -1):
        for triple in itertools.product(charge + [(group.identity, k)], repeat=3):
            if triple not in triples:
                triples.append(triple)
    skipped = 0
    for x, y, z in triples:
        reach = max(abs(x[1] + y[1]), abs(y[1] + z[1]), abs(x[1] + y[1] + z[1]))
        if cfg.site_dim ** reach > MAX_WORD_BOND:
            skipped += 1
            continue
        result = f_symbol_scalar(cfg, x, y, z, tol_exact)
        scalar = result['scalar']
        error = float('inf') if scalar is None else max(abs(scalar - 1.0), result['residual'])
        reports.append(_report(cfg, 'F(' + ','.join(result['words']) + ') = 1', error,
                               result['unique'] and error <= tol_exact, json_scalar(scalar),
                               unique=result['unique'], missing=result['missing']))
    if skipped:
        logger.info('intertwiner suite at %s: skipped %d triples above bond %d', cfg, skipped, MAX_WORD_BOND)
    return reports


def run_suite(suite, cfg, model='clock', tol=None, seed=None):
    """Reports of one named suite as JSON-safe dicts."""
    tol_exact = settings.DUALITYKIT_TOL_EXACT if tol is None else tol
    tol_eigen = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    if suite == 'fusion':
        reports = fusion_suite(cfg, tol_exact, tol_eigen, seed)
    elif suite == 'selfdual':
        reports = selfdual_suite(cfg, model, tol_exact, tol_eigen)
    elif suite == 'qca':
        if cfg.length % 2 or cfg.length < QCA_MIN_LENGTH:
            raise UnsupportedChainError(f'The qca suite needs an even L >= {QCA_MIN_LENGTH}, got {cfg.length}')
        reports = qca_suite(cfg, tol_eigen)
    elif suite == 'intertwiner':
        reports = intertwiner_suite(cfg, tol_exact)
    else:
        raise UnsupportedChainError(f'Unknown identity suite {suite!r}')
    for r in reports:
        r['suite'] = suite
    failed = [r['identity'] for r in reports if not r['pass']]
    logger.info('%s suite at %s: %d/%d identities pass', suite, cfg, len(reports) - len(failed), len(reports))
    if failed:
        logger.info('failing identities: %s', failed)
    return reports
