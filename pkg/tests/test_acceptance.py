"""Acceptance criteria, each at its stated tolerance. One PASS/FAIL line is printed per criterion."""

import json
import math

import numpy as np
from scipy import integrate

import oracles
from ecsmetro import measure as ms
from ecsmetro.cli import main
from ecsmetro.fisher_c import (
    cfi_counting,
    cfi_homodyne,
    mle_campaign,
    poisson_cutoff,
    precision_sweep,
)
from ecsmetro.fisher_q import (
    qfi,
    qfi_ecs_lossless,
    qfi_ecs_lossy,
    qfi_numeric_oracle,
    qfi_qwp_lossy,
)
from ecsmetro.specfun import lambert_w0, log_poisson_pmf
from ecsmetro.states import (
    DephasingParams,
    InterferometerParams,
    StateFamily,
    alpha_from_mean_photons,
    displacement_pair,
    ecs_normalization,
    mean_photons,
    reduced_wigner_ecs,
    reduced_wigner_marginal,
)

ECS = StateFamily.ecs()
QWP = StateFamily.qwp()


def _n(fam, n_bar, phi, loss=0.0):
    return InterferometerParams.from_phase(alpha_from_mean_photons(fam, n_bar), phi, 0.0, loss)


def test_criterion_01_lossless_homodyne_optimality(criterion):
    with criterion(1, "lossless homodyne reaches the QFI") as r:
        target = 110 + 10 * lambert_w0(10 * math.exp(-10))
        ecs = cfi_homodyne(ECS, _n(ECS, 10.0, 0.7))
        qwp = cfi_homodyne(QWP, _n(QWP, 10.0, 0.7), DephasingParams(0.0, 0.0))
        e1, e2 = abs(ecs - target) / target, abs(qwp - 110) / 110
        r.detail = f"ECS rel err {e1:.1e}, QWP rel err {e2:.1e}"
        assert e1 < 1e-6 and e2 < 1e-6


def test_criterion_02_lossless_counting_optimality(criterion):
    with criterion(2, "lossless counting reaches the QFI") as r:
        errs = [abs(cfi_counting(QWP, _n(QWP, n, 0.4)) - (n * n + n)) for n in (1.0, 4.0, 10.0)]
        ecs = cfi_counting(ECS, _n(ECS, 10.0, 0.7))
        e_ecs = abs(ecs - qfi_ecs_lossless(10.0)) / qfi_ecs_lossless(10.0)
        r.detail = f"QWP max abs err {max(errs):.1e}, ECS rel err {e_ecs:.1e}"
        assert max(errs) < 1e-8 and e_ecs < 1e-6


def test_criterion_03_closed_forms_match_oracle(criterion):
    with criterion(3, "lossy QFI closed forms match the Fock-space oracle") as r:
        worst = 0.0
        for alpha in (0.5, 1.0, 2.0, 3.0):
            for p in (0.0, 0.05, 0.2):
                for chi in (0.0, 0.3):
                    params = InterferometerParams(alpha, 0.3, -0.4, p)
                    deph = DephasingParams(chi, 0.0)
                    # cutoff <= 60 for every grid point
                    cutoff = min(60, math.ceil(alpha * alpha + 10 * alpha + 10))
                    for fam, closed in (
                        (ECS, qfi_ecs_lossy(mean_photons(ECS, alpha), p)),
                        (QWP, qfi_qwp_lossy(mean_photons(QWP, alpha), p, deph)),
                    ):
                        num = qfi_numeric_oracle(fam, params, deph, cutoff=cutoff)
                        worst = max(worst, abs(num - closed) / closed)
        r.detail = f"worst rel err {worst:.1e} over 48 points"
        assert worst < 1e-6


def test_criterion_04_phase_sweep_structure(criterion):
    with criterion(4, "phase sweep: flat homodyne, counting zeros, quantum bound below both") as r:
        fixed = _n(ECS, 10.0, 0.0, 0.05)
        grid = np.linspace(0.05, math.pi - 0.05, 128)
        hom = precision_sweep("homodyne", ECS, "phi", grid, fixed)
        cnt = precision_sweep("counting", ECS, "phi", grid, fixed)
        ratios = np.array([h.ratio_to_sql for h in hom])
        flat = float(np.max(np.abs(ratios - ratios[0])) / ratios[0])
        zeros = [cfi_counting(ECS, fixed.with_phi(phi)) for phi in (0.0, math.pi)]
        ends = precision_sweep("counting", ECS, "phi", [0.0, math.pi], fixed)
        ordered = all(h.delta_phi_min <= h.delta_phi and c.delta_phi_min <= c.delta_phi for h, c in zip(hom, cnt))
        ordered = ordered and all(e.delta_phi_min <= e.delta_phi for e in ends)
        r.detail = f"flatness {flat:.1e}, counting cfi at 0/pi {max(zeros):.1e}"
        assert flat < 1e-4
        assert max(zeros) < 1e-8 * 100
        assert ordered


def test_criterion_05_homodyne_saturation(criterion):
    with criterion(5, "homodyne precision saturates at sqrt(2) x SQL; less loss is better") as r:
        big = precision_sweep("homodyne", ECS, "n_bar", [200.0], InterferometerParams(1.0, 0.0, 0.0, 0.1))[0]
        lo = precision_sweep("homodyne", ECS, "n_bar", [5.0], InterferometerParams(1.0, 0.0, 0.0, 0.01))[0]
        hi = precision_sweep("homodyne", ECS, "n_bar", [5.0], InterferometerParams(1.0, 0.0, 0.0, 0.1))[0]
        err = abs(big.ratio_to_sql - math.sqrt(2)) / math.sqrt(2)
        r.detail = f"ratio at n=200 {big.ratio_to_sql:.6f}; n=5: {lo.ratio_to_sql:.4f} < {hi.ratio_to_sql:.4f}"
        assert err < 1e-2
        assert lo.ratio_to_sql < hi.ratio_to_sql


def _dblquad(f, params):
    d = displacement_pair(params)
    val, _ = integrate.dblquad(
        lambda y, x: f(x, y), d.mu_plus - 10, d.mu_plus + 10, d.mu_minus - 10, d.mu_minus + 10,
        epsabs=1e-10, epsrel=1e-10,
    )
    return val


def test_criterion_06_normalization(criterion):
    with criterion(6, "all four outcome laws normalize on the 3x3x3 grid") as r:
        worst = 0.0
        worst_identity = 0.0
        deph = DephasingParams(0.2, 0.5)
        for alpha in (0.5, 1.5, 3.0):
            for phi in (0.0, 1.0, 2.5):
                for p in (0.0, 0.05, 0.3):
                    params = InterferometerParams.from_phase(alpha, phi, 0.2, p)
                    lam = 0.5 * (1 - p) * alpha * alpha
                    j = np.arange(poisson_cutoff(lam) + 1)
                    m, n = np.meshgrid(j, j, indexing="ij")
                    masses = [
                        ms.ecs_counting_pmf(m, n, params).sum(),
                        sum(ms.qwp_counting_joint(m, n, X, params, deph).sum() for X in (1, -1)),
                        _dblquad(lambda x, y: ms.ecs_homodyne_pdf(x, y, params), params),
                        sum(
                            _dblquad(lambda x, y: ms.qwp_homodyne_joint(x, y, X, params, deph), params)
                            for X in (1, -1)
                        ),
                    ]
                    worst = max(worst, max(abs(t - 1.0) for t in masses))
                    # the fringe terms average to exp(-(1 - p) alpha^2) for both schemes, so the
                    # visibility exp(-p alpha^2) combines into exp(-alpha^2) and p drops out
                    series = float(np.sum(
                        np.exp(log_poisson_pmf(m, lam) + log_poisson_pmf(n, lam))
                        * np.cos((m + n) * phi + m * math.pi)
                    ))
                    d = displacement_pair(params)
                    fringe = _dblquad(
                        lambda x, y: np.exp(-((x - d.mu_plus) ** 2) - (y - d.mu_minus) ** 2) / math.pi
                        * math.cos(2 * x * d.mu_minus - 2 * y * d.mu_plus),
                        params,
                    )
                    expected = math.exp(-(1 - p) * alpha * alpha)
                    worst_identity = max(worst_identity, abs(series - expected), abs(fringe - expected))
                    norm = 2 * ecs_normalization(alpha) ** 2 * (1 + math.exp(-p * alpha**2) * expected)
                    worst_identity = max(worst_identity, abs(norm - 1.0))
        r.detail = f"worst mass error {worst:.1e}, worst identity error {worst_identity:.1e}"
        assert worst < 1e-8
        assert worst_identity < 1e-8


def test_criterion_07_score_derivatives(criterion):
    with criterion(7, "analytic phase derivatives match central differences") as r:
        rng = np.random.default_rng(20240607)
        h = 1e-5
        worst = {}
        for scheme in ("homodyne", "counting"):
            for fam in (ECS, QWP):
                errs = []
                for _ in range(1000):
                    params = InterferometerParams.from_phase(
                        rng.uniform(0, 3), rng.uniform(-math.pi, math.pi), rng.uniform(-1, 1), rng.uniform(0, 0.5)
                    )
                    deph = DephasingParams(rng.uniform(0, 1), rng.uniform(-math.pi, math.pi))
                    rec = ms.sample(scheme, fam, params, deph, rng, 1)
                    got = float(np.squeeze(ms.dlog_density(scheme, fam, rec, params, deph)))
                    up = ms.log_density(scheme, fam, rec, params.with_phi(params.phi + h), deph)
                    dn = ms.log_density(scheme, fam, rec, params.with_phi(params.phi - h), deph)
                    errs.append(abs(got - float(np.squeeze(up - dn)) / (2 * h)))
                worst[f"{scheme}/{fam}"] = max(errs)
        r.detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
        assert max(worst.values()) < 1e-6


def test_criterion_08_mle_efficiency(criterion):
    with criterion(8, "MLE spread matches the Cramer-Rao bound") as r:
        lossless = mle_campaign("homodyne", ECS, InterferometerParams.from_phase(3.0, 0.5), M=1000, trials=500,
                                rng_seed=20240)
        q = qfi(ECS, InterferometerParams(3.0)).value
        ratio0 = lossless.empirical_std / (1 / math.sqrt(1000 * q))
        lossy = mle_campaign("homodyne", ECS, InterferometerParams.from_phase(3.0, 1.0, 0.0, 0.05), M=1000,
                             trials=500, rng_seed=20240)
        ratio1 = lossy.crb_ratio
        r.detail = f"std/CRB = {ratio0:.3f} (p=0), {ratio1:.3f} (p=0.05)"
        assert abs(ratio0 - 1) <= 0.10
        assert abs(ratio1 - 1) <= 0.15


def test_criterion_09_wigner_cross_check(criterion):
    with criterion(9, "Wigner projection matches the homodyne marginal; grid normalized") as r:
        rng = np.random.default_rng(99)
        worst = worst_direct = worst_norm = 0.0
        for _ in range(20):
            alpha = rng.uniform(0.0, 2.0)
            phi1, phi2 = rng.uniform(-math.pi, math.pi, 2)
            params = InterferometerParams(alpha, phi1, phi2)
            half = alpha + 6.0
            grid = reduced_wigner_ecs(params, (-half, half), (-half, half), 400)
            worst_norm = max(worst_norm, abs(grid.total() - 1.0))
            s = grid.x_axis
            proj = reduced_wigner_marginal(params, params.phi_bar + math.pi / 2, s)
            ref = oracles.ecs_x_plus_marginal_ref(s, alpha, params.phi)
            worst = max(worst, float(np.max(np.abs(proj - ref))))
            # and against a direct integral of the joint homodyne density over x_-
            d = displacement_pair(params)
            for x in s[::40]:
                val, _ = integrate.quad(lambda y: ms.ecs_homodyne_pdf(x, y, params), d.mu_minus - 12, d.mu_minus + 12,
                                        epsabs=1e-12)
                worst_direct = max(worst_direct, abs(proj[np.searchsorted(s, x)] - val))
        r.detail = f"max |diff| {worst:.1e} (closed form), {worst_direct:.1e} (quadrature); norm err {worst_norm:.1e}"
        assert worst < 1e-4 and worst_direct < 1e-4
        assert worst_norm < 1e-6


def _cli_payload(argv, capsys):
    assert main(argv) == 0
    text = capsys.readouterr().out
    if "--format" in argv and argv[argv.index("--format") + 1] == "json":
        doc = json.loads(text)
        doc.pop("meta")
        return json.dumps(doc)
    return "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))


def test_criterion_10_determinism(criterion, capsys):
    with criterion(10, "stochastic pipelines are byte-identical under a fixed seed") as r:
        params = InterferometerParams.from_phase(2.0, 0.7, 0.1, 0.05)
        deph = DephasingParams(0.1, 0.3)
        for scheme in ("homodyne", "counting"):
            for fam in (ECS, QWP):
                a = ms.sample(scheme, fam, params, deph, 123, 2000)
                b = ms.sample(scheme, fam, params, deph, 123, 2000)
                for f in ("x_plus", "x_minus", "m", "n", "qubit_x"):
                    va, vb = getattr(a, f, None), getattr(b, f, None)
                    assert (va is None and vb is None) or va.tobytes() == vb.tobytes()
        runs = [
            mle_campaign("counting", QWP, params, deph, M=100, trials=100, rng_seed=5,
                         search_window=(0.0, 1.5), workers=w)
            for w in (1, 3)
        ]
        assert runs[0].phi_hats.tobytes() == runs[1].phi_hats.tobytes()
        base = ["--alpha", "2", "--phi", "0.7", "--loss", "0.05", "--seed", "9"]
        cli_runs = [
            ["sample", "--scheme", "homodyne", "--count", "300"] + base,
            ["mle-campaign", "--scheme", "homodyne", "--M", "100", "--trials", "100", "--threads", "1"] + base,
            ["mle-campaign", "--scheme", "homodyne", "--M", "100", "--trials", "100", "--threads", "4"] + base,
        ]
        outs = [_cli_payload(argv, capsys) for argv in cli_runs]
        assert outs[0] == _cli_payload(cli_runs[0], capsys)
        assert outs[1] == outs[2]
        r.detail = "4 samplers, campaign with 1 vs 3 workers, CLI sample and campaign with 1 vs 4 threads"
