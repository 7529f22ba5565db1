"""Unit tests for the scenario and sweep pipelines."""

import textwrap
from pathlib import Path

import pytest

from kernelzeros.errors import ConfigurationError
from kernelzeros.models.scenario import load_scenario, parse_scenario
from kernelzeros.workflows.scenario_workflow import (
    SUMMARY_COLUMNS,
    build_context,
    execute_scenario,
    write_artifacts,
)
from kernelzeros.workflows.sweep_workflow import SWEEP_COLUMNS, run_sweep, write_sweep_artifacts

pytestmark = pytest.mark.usefixtures("fast_simulation")

QUICK = textwrap.dedent(
    """\
    name: quick
    description: Small sine scenario for tests
    truth:
      name: sine
    ell: 0
    n: 300
    halfwidth: 0.15
    noise_sd: 0.3
    simulation:
      reps: 20
      seed: 1
    """
)


@pytest.fixture
def quick():
    return parse_scenario(QUICK)


class TestBuildContext:
    """Resolution of a scenario into numeric objects."""

    def test_noise_from_target_z(self) -> None:
        ctx = build_context(load_scenario("inflection-calibration"))
        assert ctx.spec.noise_sd == pytest.approx(0.003024, rel=1e-3)
        assert ctx.covers_interior

    def test_target_z_without_change_point(self) -> None:
        text = QUICK.replace("name: sine", "name: polynomial\n  params:\n    coeffs: [1.0, 1.0]")
        text = text.replace("noise_sd: 0.3", "target_z: 1.0")
        with pytest.raises(ConfigurationError, match="target_z"):
            build_context(parse_scenario(text))

    def test_counting_interval(self) -> None:
        ctx = build_context(parse_scenario(QUICK.replace("  seed: 1", "  seed: 1\n  counting_interval: [0.3, 0.7]")))
        assert ctx.interval == (0.3, 0.7)
        assert not ctx.covers_interior

    def test_counting_interval_outside_region(self) -> None:
        text = QUICK.replace("  seed: 1", "  seed: 1\n  counting_interval: [0.1, 0.7]")
        with pytest.raises(ConfigurationError, match="counting interval"):
            build_context(parse_scenario(text))

    def test_random_design(self) -> None:
        text = QUICK + "design:\n  kind: random\n  seed: 3\n"
        ctx = build_context(parse_scenario(text))
        assert ctx.design.n == 300


class TestExecuteScenario:
    """Predictions, simulations and checks of one run."""

    def test_quick_run(self, quick) -> None:
        result = execute_scenario(quick)
        names = [c.name for c in result.checks]
        assert names[:3] == ["classic_vs_alternate", "expected_zeros", "changepoint_excess"]
        assert "tail_bound" in names
        assert result.crossing is not None and result.crossing.n_z0 == 1
        assert result.analytic_zeros == pytest.approx(1.0, abs=1e-3)
        labels = [s.label for s in result.simulations]
        assert labels == ["crossings", "changepoint_excess", "spurious_frequency"]
        excess = result.simulations[1]
        assert excess.mean_crossings == pytest.approx(result.simulations[0].mean_crossings - 1.0)

    def test_unenforced_checks_do_not_fail_the_run(self, quick) -> None:
        summary = execute_scenario(quick).summary()
        unenforced = [c for c in summary.checks if not c.enforced]
        assert {c.name for c in unenforced} >= {"changepoint_excess", "tail_bound"}
        assert all(c.enforced for c in summary.failures)

    def test_monte_carlo_disabled(self, quick) -> None:
        result = execute_scenario(quick.with_overrides(reps=0))
        assert result.simulations == []
        assert "Monte Carlo disabled (reps = 0)" in result.notes
        assert [c.name for c in result.checks if c.name != "corollary_bound"] == ["classic_vs_alternate"]

    def test_zero_variance_simulation_compares(self) -> None:
        """Every replicate has one zero; a vanishing analytic excess still passes."""
        result = execute_scenario(parse_scenario(QUICK + "acceptance:\n  changepoint_excess: true\n"))
        checks = {c.name: c for c in result.checks}
        for name in ("expected_zeros", "changepoint_excess"):
            assert checks[name].stderr == 0.0
            assert checks[name].tolerance >= 1.0 / 20
            assert checks[name].passed
        assert checks["changepoint_excess"].enforced
        assert result.summary().passed

    def test_default_tail_window_meets_hypotheses(self) -> None:
        result = execute_scenario(parse_scenario(QUICK + "acceptance:\n  tail_bound: true\n"))
        cp = result.changepoints
        assert cp is not None and cp.tail is not None
        assert cp.tail.warnings == []
        assert cp.tail.width >= 2 * result.context.spec.h
        (check,) = [c for c in result.checks if c.name == "tail_bound"]
        assert check.enforced

    def test_tail_bound_unenforced_outside_hypotheses(self) -> None:
        text = QUICK + "changepoints:\n  window: 0.01\nacceptance:\n  tail_bound: true\n"
        result = execute_scenario(parse_scenario(text))
        assert result.changepoints is not None and result.changepoints.tail is not None
        assert result.changepoints.tail.warnings
        (check,) = [c for c in result.checks if c.name == "tail_bound"]
        assert not check.enforced
        assert "not enforced" in check.note
        assert check not in result.summary().failures

    @pytest.mark.parametrize("name", ["smoother-l0", "smoother-l1", "smoother-l2", "random-design-l0"])
    def test_bundled_smoothers_are_noisy(self, name: str) -> None:
        """Extra zeros beyond those of m are frequent enough for the simulation to test."""
        result = execute_scenario(load_scenario(name).with_overrides(reps=0))
        assert result.crossing is not None
        excess = result.crossing.expected_zeros - result.crossing.n_z0
        assert 0.1 <= excess <= 1.5

    def test_zero_mean_skips_alternate(self) -> None:
        result = execute_scenario(load_scenario("rice-check").with_overrides(reps=0))
        assert result.crossing is None
        assert any(note.startswith("alternate form skipped") for note in result.notes)
        assert result.changepoints is None
        assert result.analytic_zeros == pytest.approx(result.classic.value)


def test_write_artifacts(quick, tmp_path: Path) -> None:
    summary = write_artifacts(execute_scenario(quick), tmp_path)
    expected = [
        "changepoints.csv",
        "crossing_report.txt",
        "design.txt",
        "moments.csv",
        "plot_data.csv",
        "simulations.csv",
        "summary.csv",
    ]
    assert summary.artifacts == expected
    assert sorted(p.name for p in tmp_path.iterdir()) == expected

    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("# generated ")
    assert lines[1] == ",".join(SUMMARY_COLUMNS)

    design = (tmp_path / "design.txt").read_text().splitlines()
    assert design[0] == "t w"
    assert len(design) == 301

    moments = (tmp_path / "moments.csv").read_text().splitlines()
    assert moments[0] == "s,m,m_prime,sigma,xi,mu,gamma,eta"
    record = dict(line.split("=", 1) for line in (tmp_path / "crossing_report.txt").read_text().splitlines())
    assert record["scenario"] == "quick"
    assert record["alternate_n_z0"] == "1"
    assert (tmp_path / "changepoints.csv").read_text().splitlines()[0] == (
        "location,next_derivative,sigma_if,z,h_value,tail_term"
    )
    assert {line.rsplit(",", 1)[1] for line in (tmp_path / "plot_data.csv").read_text().splitlines()[1:]} == {
        "m",
        "sigma",
        "M",
        "zero_intensity",
        "truth_derivative",
    }


def test_artifacts_deterministic(quick, tmp_path: Path) -> None:
    """Identical runs differ only in the timestamp line of summary.csv."""
    first, second = tmp_path / "a", tmp_path / "b"
    for directory in (first, second):
        directory.mkdir()
        write_artifacts(execute_scenario(quick), directory)
    for path in first.iterdir():
        a = path.read_text().splitlines()
        b = (second / path.name).read_text().splitlines()
        if path.name == "summary.csv":
            a, b = a[1:], b[1:]
        assert a == b, path.name


class TestSweep:
    """Parameter sweeps and rate slopes."""

    def test_halfwidth_sweep(self, quick, tmp_path: Path) -> None:
        result = run_sweep(quick.with_overrides(reps=0), "h", [0.1, 0.15, 0.2])
        assert [row.halfwidth for row in result.rows] == [0.1, 0.15, 0.2]
        assert all(row.empirical_zeros is None for row in result.rows)
        assert all(row.predicted_excess is not None for row in result.rows)
        assert set(result.slopes) == {"variance_rel_error", "mu_sq", "max_bias"}
        # bias of a symmetric kernel grows like h²
        assert result.slopes["max_bias"] == pytest.approx(2.0, abs=0.3)

        files = write_sweep_artifacts(result, tmp_path)
        assert files == ["slopes.txt", "sweep.csv"]
        header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
        assert header == ",".join(SWEEP_COLUMNS)
        assert (tmp_path / "slopes.txt").read_text().startswith("parameter=h\n")

    def test_noise_sweep_with_simulation(self, quick) -> None:
        result = run_sweep(quick, "noise_sd", [0.2, 0.4])
        assert [row.noise_sd for row in result.rows] == [0.2, 0.4]
        assert all(row.empirical_zeros is not None for row in result.rows)
        assert all(row.empirical_excess == pytest.approx(row.empirical_zeros - 1.0) for row in result.rows)

    @pytest.mark.parametrize("parameter, values", [("ell", [0, 1]), ("h", [0.1])])
    def test_invalid(self, quick, parameter: str, values: list) -> None:
        with pytest.raises(ConfigurationError):
            run_sweep(quick, parameter, values)
