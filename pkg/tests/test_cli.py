"""CLI commands: configs, outputs, determinism, exit codes."""

import os

import numpy as np
import pytest

from z2wilson.cli import (EXIT_CONFIG, EXIT_OK, ConfigError, RunConfig,
                          load_config, main, resolve_lattice)
from z2wilson.lattice import build_rect, lattice_to_text
from z2wilson.programs import program_to_text, staircase_default


def run_main(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None, {})
        assert cfg.lattice == "cross"
        assert cfg.lam == 10.0
        assert cfg.nt == (8, 16, 32, 64, 128)

    def test_file_plus_overrides(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("lam=2.5\nnt=4,8\nseed=99   # comment\n")
        cfg = load_config(str(path), {"lam": "7"})
        assert cfg.lam == 7.0
        assert cfg.nt == (4, 8)
        assert cfg.seed == 99

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("wibble=1\n")
        with pytest.raises(ConfigError):
            load_config(str(path), {})

    def test_bad_nt(self):
        with pytest.raises(ConfigError):
            load_config(None, {"nt": "8,4"})
        with pytest.raises(ConfigError):
            load_config(None, {"nt": "x"})

    def test_hash_stable_and_sensitive(self):
        a = load_config(None, {})
        b = load_config(None, {})
        c = load_config(None, {"lam": "3"})
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()

    def test_resolve_rect(self):
        cfg = RunConfig(lattice="rect:3x2")
        lat = resolve_lattice(cfg)
        assert lat.n_links == 17

    def test_resolve_lattice_file(self, tmp_path):
        path = tmp_path / "lat.txt"
        path.write_text(lattice_to_text(build_rect(1, 1)))
        cfg = RunConfig(lattice=str(path))
        assert resolve_lattice(cfg).n_links == 4

    def test_resolve_garbage(self):
        with pytest.raises(ConfigError):
            resolve_lattice(RunConfig(lattice="pentagon"))


class TestGroundState:
    def test_lam0_output(self, capsys):
        code, out, _ = run_main(capsys, "ground-state", "--lattice", "cross",
                                "--lambda", "0")
        assert code == EXIT_OK
        assert "sector_dim 32" in out
        assert "ground_energy -16" in out

    def test_lam10_pinned(self, capsys):
        code, out, _ = run_main(capsys, "ground-state", "--lambda", "10")
        assert code == EXIT_OK
        line = next(l for l in out.splitlines()
                    if l.startswith("ground_energy"))
        assert float(line.split()[1]) == pytest.approx(-51.917375245849549,
                                                       abs=1e-9)

    def test_rect11_closed_form(self, capsys):
        code, out, _ = run_main(capsys, "ground-state", "--lattice",
                                "rect:1x1", "--lambda", "1")
        assert code == EXIT_OK
        line = next(l for l in out.splitlines()
                    if l.startswith("ground_energy"))
        assert float(line.split()[1]) == pytest.approx(-np.sqrt(17.0),
                                                       abs=1e-12)

    def test_config_error_exit_2(self, capsys):
        code, _, err = run_main(capsys, "ground-state", "--lattice", "bogus")
        assert code == EXIT_CONFIG
        assert "error" in err

    def test_degenerate_exit_3(self, capsys, monkeypatch):
        import warnings as _w
        import z2wilson.cli as cli_mod
        from z2wilson.gauge import DegenerateGroundStateWarning

        real = cli_mod.ground_state

        def warn_and_solve(model, sector, gap_tolerance=1e-10):
            _w.warn("forced", DegenerateGroundStateWarning)
            return real(model, sector)

        monkeypatch.setattr(cli_mod, "ground_state", warn_and_solve)
        code, out, _ = run_main(capsys, "ground-state", "--lattice",
                                "rect:1x1")
        assert code == 3
        assert "degenerate_ground_state true" in out

    def test_state_dump(self, capsys, tmp_path):
        out_path = tmp_path / "gs.txt"
        code, _, _ = run_main(capsys, "ground-state", "--lambda", "10",
                              "--out", str(out_path))
        assert code == EXIT_OK
        text = out_path.read_text()
        assert text.startswith("# z2wilson")
        assert "BASIS 0 0" in text
        amp_lines = [l for l in text.splitlines() if l.startswith("AMP")]
        assert len(amp_lines) == 32
        norm = sum(float(l.split()[2]) ** 2 + float(l.split()[3]) ** 2
                   for l in amp_lines)
        assert norm == pytest.approx(1.0, abs=1e-10)


class TestSweep:
    def test_small_sweep_csv(self, capsys, tmp_path):
        out_path = tmp_path / "report.csv"
        code, _, _ = run_main(capsys, "sweep", "--nt", "4,8,16",
                              "--out", str(out_path))
        assert code == EXIT_OK
        lines = out_path.read_text().splitlines()
        assert lines[0].startswith("# z2wilson")
        assert any(l == "n_T,op_fidelity,gs_fidelity" for l in lines)
        assert any(l.startswith("# fit op:") for l in lines)
        assert any(l.startswith("# min_n_T_at_threshold") for l in lines)

    def test_lam0_all_ones(self, capsys, tmp_path):
        out_path = tmp_path / "r.csv"
        code, _, _ = run_main(capsys, "sweep", "--lambda", "0", "--nt",
                              "2,4,8", "--out", str(out_path))
        assert code == EXIT_OK
        rows = [l for l in out_path.read_text().splitlines()
                if l and l[0].isdigit()]
        for row in rows:
            _, fop, fgs = row.split(",")
            assert float(fop) == pytest.approx(1.0, abs=1e-12)
            assert float(fgs) == pytest.approx(1.0, abs=1e-12)

    def test_byte_identical_reruns(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_main(capsys, "sweep", "--nt", "4,8,16", "--seed", "7",
                 "--out", str(a))
        run_main(capsys, "sweep", "--nt", "4,8,16", "--seed", "7",
                 "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_program_file(self, capsys, tmp_path):
        prog_path = tmp_path / "loop.prog"
        prog_path.write_text(program_to_text(staircase_default()))
        out_path = tmp_path / "r.csv"
        code, _, _ = run_main(capsys, "sweep", "--program", str(prog_path),
                              "--nt", "4,8,16", "--out", str(out_path))
        assert code == EXIT_OK

    def test_single_nt_9(self, capsys, tmp_path):
        out_path = tmp_path / "r.csv"
        code, _, _ = run_main(capsys, "sweep", "--nt", "9",
                              "--out", str(out_path))
        assert code == EXIT_OK
        row = next(l for l in out_path.read_text().splitlines()
                   if l.startswith("9,"))
        _, _, fgs = row.split(",")
        assert float(fgs) == pytest.approx(0.97756196884951441, abs=1e-10)


class TestMeasure:
    def test_identity_program(self, capsys, tmp_path):
        prog_path = tmp_path / "id.prog"
        prog_path.write_text("# empty program\n")
        code, out, _ = run_main(capsys, "measure", "--program",
                                str(prog_path), "--nt", "1")
        assert code == EXIT_OK
        line = next(l for l in out.splitlines()
                    if l.startswith("p_plus_exact"))
        assert float(line.split()[1]) == pytest.approx(1.0, abs=1e-12)

    def test_sampled_within_binomial_bound(self, capsys, tmp_path):
        code, out, _ = run_main(capsys, "measure", "--nt", "2", "--shots",
                                "10000", "--seed", "42")
        assert code == EXIT_OK
        vals = {l.split()[0]: float(l.split()[1]) for l in out.splitlines()}
        p, ps = vals["p_plus_exact"], vals["p_plus_sampled"]
        bound = 5 * np.sqrt(max(p * (1 - p), 1e-12) / 10000)
        assert abs(ps - p) <= bound

    def test_shot_reproducibility(self, capsys):
        _, out1, _ = run_main(capsys, "measure", "--nt", "2", "--shots",
                              "200", "--seed", "5")
        _, out2, _ = run_main(capsys, "measure", "--nt", "2", "--shots",
                              "200", "--seed", "5")
        assert out1 == out2

    def test_circuit_matches_oracle_line(self, capsys):
        _, out, _ = run_main(capsys, "measure", "--nt", "2")
        vals = {l.split()[0]: float(l.split()[1]) for l in out.splitlines()}
        assert vals["p_plus_exact"] == pytest.approx(vals["p_plus_oracle"],
                                                     abs=1e-10)


class TestNumericalFailure:
    def test_exit_4_on_unitarity_drift(self, capsys, monkeypatch, tmp_path):
        import z2wilson.cli as cli_mod
        from z2wilson.gauge import SectorOperator

        real = cli_mod.trotterized_loop_operator

        def drifting(model, sector, program, n_T):
            w = real(model, sector, program, n_T)
            return SectorOperator(w.matrix * 1.001)   # breaks unitarity

        monkeypatch.setattr(cli_mod, "trotterized_loop_operator", drifting)
        code, _, err = run_main(capsys, "sweep", "--nt", "2,4",
                                "--out", str(tmp_path / "r.csv"))
        assert code == 4
        assert "unitarity" in err


class TestExportCircuit:
    def test_program_circuit_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.qc", tmp_path / "b.qc"
        for path in (a, b):
            code, _, _ = run_main(capsys, "export-circuit", "--nt", "9",
                                  "--out", str(path))
            assert code == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        text = a.read_text()
        assert "PEXP" in text
        assert "# census" in text

    def test_empty_program(self, capsys, tmp_path):
        prog_path = tmp_path / "id.prog"
        prog_path.write_text("")
        code, out, _ = run_main(capsys, "export-circuit", "--program",
                                str(prog_path), "--nt", "1")
        assert code == EXIT_OK
        assert "total=0" in out

    def test_loop_constructions_census_ratio(self, capsys, tmp_path):
        totals = {}
        for kind in ("plaquette-loop", "link-loop"):
            for k in (2, 4):
                out_path = tmp_path / f"{kind}-{k}.qc"
                code, _, _ = run_main(capsys, "export-circuit", "--kind",
                                      kind, "--lattice", f"rect:{k}x{k}",
                                      "--out", str(out_path))
                assert code == EXIT_OK
                census = next(l for l in out_path.read_text().splitlines()
                              if l.startswith("# census"))
                totals[(kind, k)] = int(census.split("total=")[1])
        # doubling the loop size quadruples area-law counts but only
        # doubles the linear construction (up to constant overhead)
        plaq_ratio = totals[("plaquette-loop", 4)] / totals[("plaquette-loop", 2)]
        link_ratio = totals[("link-loop", 4)] / totals[("link-loop", 2)]
        assert plaq_ratio > 3.0
        assert link_ratio < 2.2

    def test_bad_kind(self, capsys):
        code, _, err = run_main(capsys, "export-circuit", "--kind", "magic")
        assert code == EXIT_CONFIG


class TestValidateCommand:
    def test_ok(self, capsys):
        code, out, _ = run_main(capsys, "validate", "--lattice", "rect:2x2")
        assert code == EXIT_OK
        assert "ok" in out

    def test_bad_lattice_file(self, capsys, tmp_path):
        path = tmp_path / "bad.lat"
        path.write_text("LATTICE v=2 e=1 p=0\nLINK 0 0 0\n")
        code, _, err = run_main(capsys, "validate", "--lattice", str(path))
        assert code == EXIT_CONFIG

    def test_program_checked_when_given(self, capsys, tmp_path):
        prog = tmp_path / "bad.prog"
        prog.write_text("SPATIAL 0\n")
        code, out, _ = run_main(capsys, "validate", "--lattice", "rect:1x1",
                                "--program", str(prog))
        assert code == EXIT_CONFIG
        assert "not gauge invariant" in out
