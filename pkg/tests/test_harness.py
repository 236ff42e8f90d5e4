import math
from pathlib import Path

import numpy as np
import pytest

from heatsplit import harness as Hn

H = Hn.FIGURE_H
SMOKE_H = (H[0], H[2], H[6], H[11])


@pytest.fixture(scope="module")
def small_problem():
    cfg = Hn.RunConfig(alpha_eps=4.0, targets=40, timing=False)
    return cfg, Hn.build_problem(cfg)


def test_config_text_parsing():
    text = """
    # figure run
    alpha_eps = 4   # eps = (4 h)^2
    P = 3
    h_values = 0.0342, 0.0148, 0.00838
    full = yes
    """
    cfg = Hn.make_config(Hn.parse_config_text(text))
    assert cfg.alpha_eps == 4.0 and cfg.p == 3 and cfg.full is True
    assert cfg.h_values == (0.0342, 0.0148, 0.00838)
    assert cfg.eps(0.01) == pytest.approx(1.6e-3)


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("p = 3\ntargets = 50\nseed = 4\n")
    cfg = Hn.load_config(str(path), {"p": "2", "seed": None})
    assert (cfg.p, cfg.targets, cfg.seed) == (2, 50, 4)


@pytest.mark.parametrize("text", ["colour = red", "p 3", "p = three", "full = maybe"])
def test_bad_config_text(text):
    with pytest.raises(Hn.ConfigError):
        Hn.make_config(Hn.parse_config_text(text))


def test_missing_config_file(tmp_path):
    with pytest.raises(Hn.ConfigError):
        Hn.load_config(str(tmp_path / "absent.cfg"))


@pytest.mark.parametrize("over", [
    {"equation": "coupled2d"},
    {"equation": "heat"},
    {"geometry": "sphere"},
    {"equation": "poisson2d", "geometry": "disc"},  # torus solution is 3D
    {"p": 4},
    {"max_distance": 0.3},
    {"alpha_eps": 0.0},
    {"h_values": (0.01, -0.02)},
])
def test_invalid_configurations(over):
    with pytest.raises(Hn.ConfigError):
        Hn.make_config(None, over)


def test_active_h():
    cfg = Hn.RunConfig()
    assert cfg.active_h() == sorted(H, reverse=True)[:-1]
    assert Hn.RunConfig(full=True).active_h()[-1] == min(H)


def test_figure_values():
    assert Hn.figure_value(2, 1.4809e-2) == pytest.approx(8.0875e-3, rel=1e-4)
    assert Hn.figure_value(3, 1.4809e-2) == pytest.approx(1.2289e-3, rel=1e-4)
    assert Hn.figure_value(3, 2e-2) is None
    assert len(Hn.FIGURE_H) == len(Hn.FIGURE_ERR[2]) == len(Hn.FIGURE_ERR[3]) == 14


def test_targets_lie_in_the_shell(small_problem):
    cfg, pb = small_problem
    assert len(pb.targets) == cfg.targets
    assert np.all((pb.r > 0) & (pb.r <= cfg.max_distance))
    q = np.hypot(pb.targets[:, 0], pb.targets[:, 1]) - cfg.major_radius
    np.testing.assert_allclose(cfg.minor_radius - np.hypot(q, pb.targets[:, 2]), pb.r, atol=1e-12)


def test_constant_solution():
    cfg = Hn.RunConfig(solution="constant", targets=20, p=3, timing=False)
    row = Hn.greens_identity_eval(cfg, 2.5e-2)
    assert row.max_rel_err < 1e-4
    assert row.err_S == 0.0  # zero density


def test_error_budget_bounds_total(small_problem):
    cfg, pb = small_problem
    for row in Hn.greens_identity_eval(cfg, H[2], pb, [1, 2, 3]):
        assert row.err_V + row.err_S + row.err_D >= row.max_rel_err * (1 - 1e-12)
        assert min(row.err_V, row.err_S, row.err_D, row.max_rel_err) >= 0


def total_potential(pb, cfg, h, P):
    eps = cfg.eps(h)
    hist = Hn._history_parts(pb, eps, h)
    V, S, D = Hn._local_parts(pb, eps, P)
    return V + hist["V"] + S + hist["S"] - D - hist["D"]


def test_eps_robustness():
    # doubling alpha_eps moves the total only by truncation error, which shrinks like h^(P+1)
    cfg = Hn.RunConfig(alpha_eps=2.0, targets=20, p=3, timing=False)
    wide = Hn.RunConfig(alpha_eps=4.0, targets=20, p=3, timing=False)
    pb = Hn.build_problem(cfg)
    diffs = []
    for h in (H[2], H[9]):  # a factor of about 2.3 in h
        d = np.max(np.abs(total_potential(pb, cfg, h, 3) - total_potential(pb, wide, h, 3))) / pb.scale
        diffs.append(d)
    assert diffs[1] <= cfg.tolerance
    assert diffs[0] / diffs[1] >= (H[2] / H[9]) ** 3.5


def test_determinism(tmp_path):
    cfg = Hn.RunConfig(alpha_eps=4.0, targets=15, timing=False, h_values=SMOKE_H, full=True)
    paths = []
    for k in range(2):
        rows = [Hn.greens_identity_eval(cfg, h) for h in SMOKE_H[:2]]
        paths.append(tmp_path / ("run%d.csv" % k))
        Hn.write_csv(str(paths[-1]), rows)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_csv_round_trip(tmp_path):
    rows = [Hn.ConvergenceRow(h, (4 * h) ** 2, 2, 1e-3 * h, 1e-4, 2e-4, 3e-4, 0.5) for h in (0.01, 0.03, 0.02)]
    path = tmp_path / "out.csv"
    Hn.write_csv(str(path), rows)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(Hn.CSV_COLUMNS)
    back = Hn.read_csv(str(path))
    assert [r.h for r in back] == [0.03, 0.02, 0.01]
    assert back[0] == sorted(rows, key=lambda r: -r.h)[0]
    mantissa = lines[1].split(",")[0].split("e")[0]
    assert len(mantissa.replace(".", "").lstrip("-")) >= 12


def test_p0_smoke_slope():
    cfg = Hn.RunConfig(alpha_eps=4.0, targets=30, p=0, h_values=SMOKE_H, full=True, timing=False)
    (res,) = Hn.convergence_study(cfg)
    assert res.passed and res.band == (0.5, 1.8)
    assert res.slope == pytest.approx(1.0, abs=0.5)
    assert "fitted slope" in Hn.study_report(res)


def test_study_needs_enough_rows():
    with pytest.raises(Hn.ConfigError):
        Hn.convergence_study(Hn.RunConfig(h_values=(0.04, 0.03, 0.02, 0.015), full=True))
    with pytest.raises(Hn.ConfigError):
        Hn.convergence_study(Hn.RunConfig(h_values=(0.04, 0.01), full=True))


def test_fit_slope():
    hs = np.array([0.04, 0.02, 0.01])
    assert Hn.fit_slope(hs, 3 * hs ** 4) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        Hn.fit_slope(hs, [1.0, 0.0, 1.0])


def test_poisson2d_disc():
    cfg = Hn.RunConfig(equation="poisson2d", geometry="disc", solution="disc", targets=30, p=4,
                       alpha_eps=1.0, timing=False)
    pb = Hn.build_problem(cfg)
    errs = [Hn.greens_identity_eval(cfg, h, pb).max_rel_err for h in (0.04, 0.02)]
    assert errs[0] < 1e-3
    assert math.log2(errs[0] / errs[1]) >= 3.0


def test_shipped_figure_config():
    path = Path(__file__).resolve().parents[1] / "configs" / "figure.cfg"
    cfg = Hn.load_config(str(path))
    assert (cfg.equation, cfg.geometry, cfg.targets, cfg.alpha_eps) == ("poisson3d", "torus", 1000, 4.0)
    assert cfg.h_values == Hn.FIGURE_H and not cfg.full
