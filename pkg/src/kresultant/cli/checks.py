"""Report rows for one grid point.

Rows for a grid point come out in a fixed order: grid-level checks first
(set label ``*``), then each set in corpus order with its checks in config
order.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np

from ..errors import HypothesisFail, KResultantError, TooLarge
from ..field import field_audit, make_field
from ..lattice import PointSet, Space, build_set
from ..magnitude import (SPECTRAL_LIMIT, delta_report, lemma_audit, nu_profile, nu_profile_bruteforce,
                         sign_sweep, theorem_exponents)
from ..numeric import close, leq
from ..restriction import (extension_constant, hc_identity, holder_chain, l2_sphere_energy,
                           restriction_ratio, sphere_moment)
from ..spectral import (adjoint_identity, dual_sum_identity, fourier, fourier_naive, set_hat,
                        sphere_hat_closed, sphere_hats)
from .config import ExperimentConfig, expand_specs
from .report import ReportRow

NAIVE_LIMIT = 2401  # largest q^d at which the runner re-checks the fast transform
BRUTE_LIMIT = 200_000  # largest |E|^k enumerated tuple by tuple


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _ratio(lhs, rhs):
    try:
        return float(lhs) / float(rhs) if float(rhs) != 0 else None
    except (TypeError, ValueError):
        return None


class _Rows:
    """Accumulates rows for one grid point and stamps each with its timing."""

    def __init__(self, p: int, n: int, d: int):
        self.p, self.n, self.d = p, n, d
        self.rows: list[ReportRow] = []
        self._t0 = time.perf_counter()

    def add(self, label, check, status, k=None, hyp=True, lhs=None, rhs=None, ratio=None,
            note="", **exact):
        now = time.perf_counter()
        if ratio is None and lhs is not None and rhs is not None and status != "n/a":
            ratio = _ratio(lhs, rhs)
        self.rows.append(ReportRow(p=self.p, n=self.n, d=self.d, set_label=label, check=check,
                                   status=status, k=k, hypothesis_met=hyp, lhs=lhs, rhs=rhs,
                                   ratio=ratio, seconds=round(now - self._t0, 6), note=note,
                                   exact=exact))
        self._t0 = now

    def na(self, label, check, reason, k=None):
        self.add(label, check, "n/a", k=k, hyp=False, note=reason)

    @contextmanager
    def guard(self, label, check, k=None):
        """Turn a failing hypothesis into an n/a row, a size refusal into a
        skipped row and any other library error into a failed row."""
        try:
            yield
        except HypothesisFail as exc:
            self.na(label, check, str(exc), k)
        except TooLarge as exc:
            self.add(label, check, "skipped", k=k, hyp=False, note=f"TooLarge: {exc}")
        except KResultantError as exc:
            self.add(label, check, "fail", k=k, note=f"{type(exc).__name__}: {exc}")


def sharpness(p: int, d: int, k: int) -> ReportRow:
    """The subfield example: E = F_p^d inside F_{p^2}^d has |E| = q^(d/2) and
    |Delta_k(E)| = sqrt(q) = p."""
    space = Space(make_field(p, 2), d)
    E = build_set(space, f"subfield({p}, 2, {d})")
    rep = delta_report(space, E, k)
    ok = E.size == p**d and rep.cardinality == p
    return ReportRow(p=p, n=2, d=d, set_label=E.label, check="sharpness", status=_status(ok),
                     k=k, lhs=rep.cardinality, rhs=p, ratio=rep.cardinality / p,
                     exact={"set_size": E.size, "q_half_d": p**d})


def _nonsquare(space: Space) -> int:
    return int(np.flatnonzero(space.field.chars.eta == -1)[0])


def _grid_identities(out: _Rows, cfg: ExperimentConfig, space: Space, tol: float) -> None:
    q, d, N = space.q, space.d, space.size
    for name, lhs, rhs, ok in field_audit(space.field, tol):
        out.add("*", f"field:{name}", _status(ok), lhs=lhs, rhs=rhs)

    spheres = space.spheres
    partition = int(spheres.sizes.sum()) == N
    symmetric = all(np.array_equal(np.sort(space.neg(m)), m) for m in spheres.members)
    out.add("*", "sphere_partition", _status(partition and symmetric),
            lhs=int(spheres.sizes.sum()), rhs=N)
    dev = np.abs(spheres.sizes.astype(np.int64) - q ** (d - 1))
    if d % 2 == 0:
        worst, bound = int(dev.max()), q ** (d // 2)
        out.add("*", "sphere_sizes", _status(worst < bound), lhs=worst, rhs=bound)
    elif d >= 3:
        worst, bound = int(dev[1:].max()), q ** ((d - 1) // 2)
        out.add("*", "sphere_sizes", _status(worst <= bound), lhs=worst, rhs=bound)
    out.add("*", "norm_surjective", _status(bool(np.all(spheres.sizes >= 1))),
            lhs=int(spheres.sizes.min()), rhs=1)

    rng = np.random.default_rng(cfg.seeds[0])
    if N <= NAIVE_LIMIT:
        f = rng.normal(size=N) + 1j * rng.normal(size=N)
        err = max(float(np.abs(fourier(space, f, m).values - fourier_naive(space, f, m).values).max())
                  for m in ("hat", "tilde", "inverse"))
        out.add("*", "fast_vs_naive", _status(err <= tol * N), lhs=err, rhs=tol * N)

    H = sphere_hats(space)
    if d % 2 == 0:
        err = max(float(np.abs(sphere_hat_closed(space, t) - H[t]).max()) for t in range(q))
        out.add("*", "P2.1", _status(err < tol * q), lhs=err, rhs=tol * q)
    else:
        out.na("*", "P2.1", "closed form stated for even d")

    if N <= 81:
        m, v = (g.ravel() for g in np.meshgrid(np.arange(N), np.arange(N), indexing="ij"))
    else:
        m = rng.integers(N, size=cfg.dual_sum_samples)
        v = rng.integers(N, size=cfg.dual_sum_samples)
        v[: q] = m[: q]  # force some pairs with equal norms and m == v
    lhs, rhs = dual_sum_identity(space, m, v)
    err = float(np.abs(lhs - rhs).max())
    out.add("*", "P2.2", _status(err < tol * q), lhs=err, rhs=tol * q, pairs=len(m))

    f = rng.normal(size=N) + 1j * rng.normal(size=N)
    g = rng.normal(size=N) + 1j * rng.normal(size=N)
    a, b = adjoint_identity(space, f, g, 1)
    members = space.spheres.members[1]
    scale = float(np.mean(np.abs(f[members]))) * float(np.sum(np.abs(g)))
    out.add("*", "extension_adjoint", _status(close(a, b, scale, tol)),
            lhs=abs(a - b), rhs=tol * scale)

    if d % 2 == 0 and d >= 4:
        for which in ("T1.3",) + (("T1.4",) if d >= 8 else ()):
            try:
                beta = theorem_exponents(d, which)
                out.add("*", f"{which}-exponent", "pass", lhs=beta, rhs=beta, beta=beta)
            except AssertionError as exc:
                out.add("*", f"{which}-exponent", "fail", note=str(exc))
    if d % 2 == 0 and d >= 8:
        out.add("*", "HC", _status(hc_identity(d)))


def _set_identities(out: _Rows, cfg: ExperimentConfig, space: Space, E: PointSet,
                    tol: float) -> None:
    N = space.size
    label = E.label
    hat = set_hat(space, E)
    plan = math.fsum(np.abs(hat) ** 2)
    out.add(label, "plancherel", _status(close(plan, E.size / N, plan, tol)),
            lhs=plan, rhs=E.size / N)
    out.add(label, "hat_origin", _status(close(hat[0], E.size / N, 1, tol)),
            lhs=float(hat[0].real), rhs=E.size / N)
    back = fourier(space, hat, "inverse").values
    err = float(np.abs(back - E.bits).max())
    out.add(label, "inversion", _status(err <= tol * max(1, E.size)), lhs=err,
            rhs=tol * max(1, E.size))
    for k in (2, 3, 4, 5):
        lhs = math.fsum(np.abs(hat) ** k)
        rhs = E.size ** (k - 1) / float(space.q) ** (space.d * k - space.d)
        out.add(label, "R2.1", _status(leq(lhs, rhs, tol)), k=k, lhs=lhs, rhs=rhs)

    twist = _nonsquare(space)
    for k in cfg.k_values:
        if E.size**k >= SPECTRAL_LIMIT:
            out.add(label, "nu_cross", "skipped", k=k, hyp=False,
                    note="spectral route cannot resolve counts this large")
            continue
        prof = nu_profile(space, E, k, "both")
        ok = sum(prof.counts) == E.size**k
        out.add(label, "nu_cross", _status(ok), k=k, lhs=sum(prof.counts), rhs=E.size**k,
                residual=prof.residual)
        if E.size**k <= BRUTE_LIMIT:
            brute = nu_profile_bruteforce(space, E, k)
            out.add(label, "nu_bruteforce", _status(brute == prof.counts), k=k)
        other = nu_profile(space, E, k, "spectral", twist=twist)
        out.add(label, "character_independence", _status(other.counts == prof.counts), k=k,
                twist=twist)


def _set_checks(out: _Rows, cfg: ExperimentConfig, space: Space, E: PointSet) -> None:
    tol = cfg.tolerance
    label = E.label
    q, d = space.q, space.d
    checks = cfg.checks
    if "identities" in checks:
        with out.guard(label, "identities"):
            _set_identities(out, cfg, space, E, tol)

    for k in cfg.k_values:
        if "lemma_audit" in checks:
            with out.guard(label, "lemma_audit", k):
                for r in lemma_audit(space, E, k, tol=tol).records:
                    if r.name == "R2.1":
                        continue
                    if not r.hypothesis_met:
                        out.na(label, r.name, "hypothesis not met", k)
                    else:
                        out.add(label, r.name, _status(r.passed), k=k, lhs=r.lhs, rhs=r.rhs,
                                ratio=r.slack_ratio)
        if "r41" in checks:
            with out.guard(label, "R4.1", k):
                rep = delta_report(space, E, k)
                out.add(label, "R4.1", _status(rep.r41_holds), k=k, lhs=rep.lower_bound_r41,
                        rhs=rep.cardinality, bound=rep.lower_bound_r41)
                out.add(label, "L4.1", "tracked", k=k, hyp=rep.lemma41_hypothesis,
                        lhs=rep.cardinality, rhs=rep.lemma41_bound,
                        ratio=rep.ratio_actual_over_bound)
                out.add(label, "delta_size", "tracked", k=k, hyp=rep.lemma41_hypothesis,
                        lhs=rep.cardinality, rhs=q)
        if "moments" in checks:
            with out.guard(label, "moments", k):
                mt = sphere_moment(space, E, k)
                col = math.fsum(mt.per_t)
                out.add(label, "moments-sum", _status(close(col, mt.total, mt.total, tol)), k=k,
                        lhs=col, rhs=mt.total)
                out.add(label, "moments", "tracked", k=k, lhs=mt.max_nonzero_t, rhs=mt.total,
                        argmax_t=mt.argmax_t)
        if "L3.2" in checks:
            with out.guard(label, "L3.2", k):
                rep = restriction_ratio(space, E, k, "L3.2")
                out.add(label, "L3.2", "tracked", k=k, lhs=rep.measured_lhs, rhs=rep.bound_rhs,
                        ratio=rep.implied_constant, q_exp=rep.exponents["q"],
                        E_exp=rep.exponents["E"], log_slack=rep.log_slack)
        if "L3.3" in checks and k == 3:
            with out.guard(label, "L3.3", k):
                rep = restriction_ratio(space, E, k, "L3.3")
                out.add(label, "L3.3", "tracked", k=k, lhs=rep.measured_lhs, rhs=rep.bound_rhs,
                        ratio=rep.implied_constant, q_exp=rep.exponents["q"],
                        E_exp=rep.exponents["E"], log_slack=rep.log_slack)
        if "sign_sweep" in checks:
            with out.guard(label, "sign_sweep", k):
                sizes = sign_sweep(space, E, k)
                lo, hi = min(sizes.values()), max(sizes.values())
                out.add(label, "sign_sweep", "tracked", k=k, lhs=lo, rhs=hi,
                        **{f"minus_{m}": c for m, c in sizes.items()})

    for t in range(1, q):
        if "realaim" in checks:
            with out.guard(label, f"realaim[t={t}]"):
                rep = l2_sphere_energy(space, E, t, tol=tol)
                out.add(label, f"realaim-identity[t={t}]", _status(rep.extra["identity_ok"]),
                        lhs=rep.measured_lhs, rhs=rep.extra["expansion"])
                out.add(label, f"realaim[t={t}]", "tracked", hyp=rep.hypothesis_met,
                        lhs=rep.measured_lhs, rhs=rep.bound_rhs, ratio=rep.implied_constant,
                        log_slack=rep.log_slack)
        if "holder" in checks and d % 2 == 0 and d >= 8:
            with out.guard(label, f"holder[t={t}]"):
                rep = holder_chain(space, E, t, tol=tol)
                out.add(label, f"holder[t={t}]", _status(rep.passed), lhs=rep.measured_lhs,
                        rhs=rep.bound_rhs, ratio=rep.implied_constant)


def grid_point_rows(cfg: ExperimentConfig, p: int, n: int, d: int) -> list[ReportRow]:
    out = _Rows(p, n, d)
    space = Space(make_field(p, n), d)
    tol = cfg.tolerance
    if "identities" in cfg.checks:
        with out.guard("*", "identities"):
            _grid_identities(out, cfg, space, tol)
    if "holder" in cfg.checks and not (d % 2 == 0 and d >= 8):
        out.na("*", "holder", "needs even d >= 8")
    if "extension_constant" in cfg.checks:
        if d % 2 == 0 and d >= 4:
            for t in range(1, space.q):
                with out.guard("*", f"extension[t={t}]"):
                    rep = extension_constant(space, t, cfg.extension_trials, cfg.seeds[0])
                    out.add("*", f"extension[t={t}]", "tracked", lhs=rep.measured_lhs,
                            rhs=rep.bound_rhs, ratio=rep.implied_constant,
                            log_slack=rep.log_slack)
        else:
            out.na("*", "extension", "needs even d >= 4")
    if "sharpness" in cfg.checks:
        if n == 2:
            for k in cfg.k_values:
                with out.guard("*", "sharpness", k):
                    row = sharpness(p, d, k)
                    out.add(row.set_label, "sharpness", row.status, k=k, lhs=row.lhs,
                            rhs=row.rhs, **row.exact)
        else:
            out.na("*", "sharpness", "needs q = p^2")

    for spec in expand_specs(cfg, p, n, d):
        try:
            E = build_set(space, spec)
        except KResultantError as exc:
            out.add(spec, "build", "skipped", hyp=False, note=f"{type(exc).__name__}: {exc}")
            continue
        if E.size == 0:
            out.add(spec, "build", "skipped", hyp=False, note="empty set")
            continue
        _set_checks(out, cfg, space, E)
    return out.rows
