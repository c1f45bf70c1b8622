import json

import numpy as np
import pytest

from planchain.chains import ChainConfig, chain_states, run_chain
from planchain.cli import main
from planchain.formats import (
    EnsembleWriter,
    FormatError,
    ensemble_columns,
    parse_chain_config,
    read_ensemble,
    read_plan,
    read_plot_table,
    write_plan,
)
from planchain.graph import load_graph, serialize_graph
from planchain.grids import column_plan_labels, grid_graph
from planchain.metrics import MetricVector
from planchain.partition import Plan

from conftest import make_graph


@pytest.fixture()
def grid_file(tmp_path, grid4x4):
    path = tmp_path / "grid.json"
    serialize_graph(grid4x4, path)
    return path


def write_config(tmp_path, **overrides):
    values = {"proposal": "recom", "steps": 20, "seed": 42, "pop_tolerance": 0.01}
    values.update(overrides)
    path = tmp_path / "chain.cfg"
    path.write_text(
        "\n".join(f"{k} = {v}" for k, v in values.items()) + "\n", encoding="utf-8"
    )
    return path


class TestPlanFiles:
    def test_roundtrip(self, tmp_path, grid4x4, halves_plan):
        path = tmp_path / "plan.csv"
        write_plan(halves_plan, grid4x4, path)
        assert read_plan(path, grid4x4) == halves_plan
        first = path.read_text().splitlines()[0]
        assert first == f"{grid4x4.ids[0]},0"

    def test_missing_precinct(self, tmp_path, grid4x4):
        path = tmp_path / "plan.csv"
        path.write_text("p00,0\n")
        with pytest.raises(FormatError, match="no district"):
            read_plan(path, grid4x4)

    def test_unknown_precinct(self, tmp_path, grid4x4, halves_plan):
        path = tmp_path / "plan.csv"
        write_plan(halves_plan, grid4x4, path)
        with open(path, "a") as fh:
            fh.write("ghost,1\n")
        with pytest.raises(FormatError, match="ghost"):
            read_plan(path, grid4x4)


class TestConfigFiles:
    def test_parse_full(self, tmp_path):
        path = write_config(
            tmp_path,
            proposal="weighted-flip",
            gibbs_beta=0.5,
            cut_edge_bound=30,
            elections="alpha,beta",
            start="plans/start.csv",
        )
        cfg = parse_chain_config(path)
        assert cfg.proposal == "weighted-flip"
        assert cfg.steps == 20
        assert cfg.seed == 42
        assert cfg.gibbs_beta == 0.5
        assert cfg.cut_edge_bound == 30
        assert cfg.elections == ("alpha", "beta")
        assert cfg.start == "plans/start.csv"

    def test_defaults(self, tmp_path):
        cfg = parse_chain_config(write_config(tmp_path))
        assert cfg.cut_edge_bound is None
        assert cfg.gibbs_beta == 0.0
        assert cfg.elections is None

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("proposal = recom\nsteps = 5\nseed = 1\nbogus = 3\n")
        with pytest.raises(FormatError, match="bogus"):
            parse_chain_config(path)

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("proposal = recom\nsteps = 5\n")
        with pytest.raises(FormatError, match="seed"):
            parse_chain_config(path)

    def test_digest_stable(self, tmp_path):
        a = parse_chain_config(write_config(tmp_path))
        b = parse_chain_config(write_config(tmp_path))
        assert a.digest() == b.digest()


class TestEnsembleFiles:
    def run_to_file(self, tmp_path, graph, plan, steps=10, seed=3):
        config = ChainConfig(
            proposal="recom",
            steps=steps,
            seed=seed,
            start=plan,
            pop_tolerance=0.01,
        )
        path = tmp_path / "ens.csv"
        with EnsembleWriter(path, graph, config, config_digest="abc") as writer:
            run_chain(graph, config, recorder=writer.write)
        return path

    def test_roundtrip_columns(self, tmp_path, grid4x4, halves_plan):
        path = self.run_to_file(tmp_path, grid4x4, halves_plan)
        table = read_ensemble(path)
        assert len(table) == 10
        assert table.k == 2
        assert table.elections == ("alpha", "beta")
        expected = ensemble_columns(2, ("alpha", "beta"))
        assert list(table.columns) == expected
        assert table.provenance == "abc"

    def test_metric_columns_in_declared_order(self):
        cols = ensemble_columns(2, ("x",))
        assert cols[:3] == ["step", "hash", "cut_edges"]
        assert cols[3:5] == ["x_share_1", "x_share_2"]
        assert cols[5:] == [f"x_{f}" for f in MetricVector.FIELDS]

    def test_prefix_is_valid_ensemble(self, tmp_path, grid4x4, halves_plan):
        path = self.run_to_file(tmp_path, grid4x4, halves_plan)
        text = path.read_text()
        cut = text[: int(len(text) * 0.6)]  # chop mid-line
        partial = tmp_path / "partial.csv"
        partial.write_text(cut)
        table = read_ensemble(partial)
        assert 0 < len(table) < 10
        full = read_ensemble(path)
        np.testing.assert_array_equal(
            table.column("cut_edges"), full.column("cut_edges")[: len(table)]
        )

    def test_not_an_ensemble(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(FormatError, match="not an ensemble"):
            read_ensemble(path)


class TestCliIngest:
    def test_fixture_roundtrip(self, tmp_path, grid_file, capsys):
        out = tmp_path / "bundle"
        code = main(["ingest", "--graph", str(grid_file), "--out", str(out)])
        assert code == 0
        assert (out / "graph.json").exists()
        merged = json.loads((out / "merge_report.json").read_text())
        assert merged["node_delta"] == 0
        validation = json.loads((out / "validation_report.json").read_text())
        assert validation["connected"] is True

    def test_merges_marked_precincts(self, tmp_path, grid4x4):
        raw = tmp_path / "raw.json"
        serialize_graph(grid4x4, raw, defect_marks={"p11": 2, "p23": 1})
        out = tmp_path / "bundle"
        assert main(["ingest", "--graph", str(raw), "--out", str(out)]) == 0
        merged = load_graph(out / "graph.json")
        assert merged.node_count == 14
        report = json.loads((out / "merge_report.json").read_text())
        assert report["node_delta"] == 2

    def test_bad_edge_names_offender(self, tmp_path, grid_file, capsys):
        doc = json.loads(grid_file.read_text())
        doc["edges"].append(["p00", "phantom"])
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code = main(["ingest", "--graph", str(bad), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "phantom" in capsys.readouterr().err

    def test_usage_error_is_exit_one(self):
        assert main(["run", "--graph", "x"]) == 1


class TestCliRun:
    def test_record_count_and_determinism(self, tmp_path, grid_file, grid4x4,
                                           halves_plan):
        plan_path = tmp_path / "start.csv"
        write_plan(halves_plan, grid4x4, plan_path)
        config = write_config(tmp_path, steps=100)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            code = main([
                "run",
                "--graph", str(grid_file),
                "--config", str(config),
                "--plan", str(plan_path),
                "--out", str(out),
            ])
            assert code == 0
        payload_a = (out_a / "ensemble_000.csv").read_bytes()
        payload_b = (out_b / "ensemble_000.csv").read_bytes()
        assert payload_a == payload_b
        table = read_ensemble(out_a / "ensemble_000.csv")
        assert len(table) == 100
        assert table.column("step").tolist() == list(range(1, 101))

    def test_multiple_chains_differ(self, tmp_path, grid_file, grid4x4, halves_plan):
        plan_path = tmp_path / "start.csv"
        write_plan(halves_plan, grid4x4, plan_path)
        config = write_config(tmp_path, steps=30)
        out = tmp_path / "multi"
        code = main([
            "run",
            "--graph", str(grid_file),
            "--config", str(config),
            "--plan", str(plan_path),
            "--chains", "2",
            "--out", str(out),
        ])
        assert code == 0
        t0 = read_ensemble(out / "ensemble_000.csv")
        t1 = read_ensemble(out / "ensemble_001.csv")
        assert t0.column("hash").tolist() != t1.column("hash").tolist()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["chains"] == 2

    def test_constraint_violating_start(self, tmp_path, grid_file, grid4x4, capsys):
        bad = Plan([0] * 8 + [1] * 4 + [2] * 4, 3)
        plan_path = tmp_path / "bad.csv"
        write_plan(bad, grid4x4, plan_path)
        config = write_config(tmp_path)
        code = main([
            "run",
            "--graph", str(grid_file),
            "--config", str(config),
            "--plan", str(plan_path),
            "--out", str(tmp_path / "o"),
        ])
        assert code == 2


class TestCliAnalyze:
    def prepare_run(self, tmp_path, grid_file, grid4x4, halves_plan, steps=50):
        plan_path = tmp_path / "start.csv"
        write_plan(halves_plan, grid4x4, plan_path)
        config = write_config(tmp_path, steps=steps)
        out = tmp_path / "run"
        assert main([
            "run",
            "--graph", str(grid_file),
            "--config", str(config),
            "--plan", str(plan_path),
            "--out", str(out),
        ]) == 0
        return out / "ensemble_000.csv"

    def test_single_record_percentiles_are_fifty(self, tmp_path, grid_file,
                                                 grid4x4, halves_plan):
        # enacted plan identical to the lone record: the tie rule puts every
        # percentile at 50 and its RMD against the medians at 0
        config = ChainConfig(
            proposal="recom", steps=1, seed=42, start=halves_plan, pop_tolerance=0.01
        )
        (step, plan, _), = list(chain_states(grid4x4, config))
        enacted_path = tmp_path / "enacted.csv"
        write_plan(plan, grid4x4, enacted_path)
        ensemble = self.prepare_run(tmp_path, grid_file, grid4x4, halves_plan, steps=1)
        out = tmp_path / "analysis"
        code = main([
            "analyze", str(ensemble),
            "--graph", str(grid_file),
            "--plan", str(enacted_path),
            "--out", str(out),
        ])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        for election in ("alpha", "beta"):
            metrics = report["elections"][election]["metrics"]
            for name, entry in metrics.items():
                assert entry["percentile"] == pytest.approx(50.0), name
            assert metrics["rmd"]["enacted"] == pytest.approx(0.0, abs=1e-15)
        assert report["cut_edges"]["percentile"] == pytest.approx(50.0)
        assert report["records"] == 1

    def test_plot_data_files(self, tmp_path, grid_file, grid4x4, halves_plan):
        ensemble = self.prepare_run(tmp_path, grid_file, grid4x4, halves_plan)
        enacted_path = tmp_path / "enacted.csv"
        write_plan(halves_plan, grid4x4, enacted_path)
        out = tmp_path / "analysis"
        code = main([
            "analyze", str(ensemble),
            "--graph", str(grid_file),
            "--plan", str(enacted_path),
            "--election", "alpha",
            "--out", str(out),
        ])
        assert code == 0
        kind, meta, header, cols = read_plot_table(out / "density_lrvs_alpha.csv")
        assert kind == "density-overlay"
        assert header == ["chain_0"]
        assert len(cols["chain_0"]) == 50
        assert meta["starts"] == [pytest.approx(280 / 800)]

        kind, meta, header, cols = read_plot_table(out / "sorted_shares_alpha.csv")
        assert kind == "violins"
        assert header == ["share_1", "share_2"]
        assert meta["enacted"] == pytest.approx([280 / 800, 440 / 800])
        assert len(meta["enacted_percentiles"]) == 2

        kind, meta, header, cols = read_plot_table(out / "cut_edges_hist.csv")
        assert kind == "histogram"
        assert meta["enacted"] == 4
        assert len(cols["value"]) == 50

        kind, meta, header, cols = read_plot_table(out / "scatter_rmd_alpha.csv")
        assert kind == "scatter-marginals"
        assert header == ["rmd", "lrvs"]
        assert "enacted_x" in meta and "enacted_y" in meta

    def test_psrf_present_with_two_chains(self, tmp_path, grid_file, grid4x4,
                                          halves_plan):
        plan_path = tmp_path / "start.csv"
        write_plan(halves_plan, grid4x4, plan_path)
        config = write_config(tmp_path, steps=40)
        out = tmp_path / "run"
        assert main([
            "run",
            "--graph", str(grid_file),
            "--config", str(config),
            "--plan", str(plan_path),
            "--chains", "2",
            "--out", str(out),
        ]) == 0
        analysis = tmp_path / "analysis"
        code = main([
            "analyze",
            str(out / "ensemble_000.csv"), str(out / "ensemble_001.csv"),
            "--graph", str(grid_file),
            "--plan", str(plan_path),
            "--election", "alpha",
            "--out", str(analysis),
        ])
        assert code == 0
        report = json.loads((analysis / "report.json").read_text())
        assert report["chains"] == 2
        assert "psrf" in report["elections"]["alpha"]["metrics"]["lrvs"]
        assert "density_check" in report

    def test_column_mismatch_rejected(self, tmp_path, grid_file, grid4x4,
                                      halves_plan):
        ensemble = self.prepare_run(tmp_path, grid_file, grid4x4, halves_plan, steps=5)
        other_graph = grid_graph(4, 4, population=100)  # single election
        other_file = tmp_path / "other.json"
        serialize_graph(other_graph, other_file)
        other_plan = tmp_path / "other_plan.csv"
        plan = Plan(column_plan_labels(4, 4, 2), 2)
        write_plan(plan, other_graph, other_plan)
        config = write_config(tmp_path, steps=5)
        out2 = tmp_path / "run2"
        assert main([
            "run",
            "--graph", str(other_file),
            "--config", str(config),
            "--plan", str(other_plan),
            "--out", str(out2),
        ]) == 0
        code = main([
            "analyze", str(ensemble), str(out2 / "ensemble_000.csv"),
            "--graph", str(grid_file),
            "--plan", str(other_plan),
            "--out", str(tmp_path / "a2"),
        ])
        assert code == 2


class TestCliSuperdistrict:
    def write_graph(self, tmp_path, votes):
        g = make_graph(
            pops=[10] * len(votes),
            votes_by_election={"e": votes},
            edges=[(i, i + 1) for i in range(len(votes) - 1)],
        )
        path = tmp_path / "sd.json"
        serialize_graph(g, path)
        return path

    def test_zero_swaps_when_seed_exceeds_half(self, tmp_path):
        votes = [(10, 90), (10, 90), (90, 10), (90, 10)]  # (rep, dem)
        path = self.write_graph(tmp_path, votes)
        out = tmp_path / "sd_out"
        code = main([
            "superdistrict", "--graph", str(path), "--election", "e",
            "--pop-tolerance", "0.5", "--out", str(out),
        ])
        assert code == 0
        report = json.loads((out / "superdistrict_report.json").read_text())
        assert report["swaps"] == 0
        assert report["super_district_dem_share"] == pytest.approx(0.9)

    def test_single_swap_fixture(self, tmp_path):
        # seeded super district holds the 100% precinct and the big modest
        # one; trading the big one for a slightly less Democratic but much
        # smaller-turnout precinct raises the share, exactly once
        votes = [(0, 20), (50, 50), (25, 24), (50, 0)]  # (rep, dem)
        path = self.write_graph(tmp_path, votes)
        out = tmp_path / "sd_out"
        code = main([
            "superdistrict", "--graph", str(path), "--election", "e",
            "--pop-tolerance", "0.5", "--out", str(out),
        ])
        assert code == 0
        report = json.loads((out / "superdistrict_report.json").read_text())
        assert report["swaps"] == 1
        assert report["super_district_dem_share"] == pytest.approx(44 / 69)
        plan_file = out / "superdistrict_plan.csv"
        assert plan_file.exists()
        assert len(plan_file.read_text().splitlines()) == 4

    def test_plan_file_is_four_districts(self, tmp_path):
        votes = [(10, 90)] * 4 + [(90, 10)] * 4
        path = self.write_graph(tmp_path, votes)
        out = tmp_path / "sd_out"
        assert main([
            "superdistrict", "--graph", str(path), "--election", "e",
            "--pop-tolerance", "0.5", "--out", str(out),
        ]) == 0
        g = load_graph(path)
        plan = read_plan(out / "superdistrict_plan.csv", g)
        assert plan.k == 4
        report = json.loads((out / "superdistrict_report.json").read_text())
        assert len(report["districts"]) == 4
        assert "contiguous" in report
