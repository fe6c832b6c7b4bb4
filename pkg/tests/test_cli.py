import json

import pytest

from rioulab import cli, losses


def run(argv):
    return cli.main(argv)


def write_sim_config(path, **overrides):
    cfg = {
        "sample_count": 300,
        "iou_distribution": [[0.1, 0.4], [0.2, 0.25], [0.3, 0.15],
                             [0.4, 0.1], [0.5, 0.05], [0.6, 0.05]],
        "perturb_mode": "SHIFT",
        "steps": 30,
        "learning_rate": 0.05,
        "loss_kind": "RIOU",
        "beta": 0.95,
        "seed": 7,
    }
    cfg.update(overrides)
    for key in [k for k, v in cfg.items() if v is None]:
        del cfg[key]
    path.write_text(json.dumps(cfg))
    return path


class TestHelp:
    @pytest.mark.parametrize("cmd", ["solve-params", "curves", "gradcheck",
                                     "simulate", "pyramid"])
    def test_subcommand_help_exits_zero(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            run([cmd, "--help"])
        assert exc.value.code == 0
        assert "--" in capsys.readouterr().out


class TestSolveParams:
    def test_ok(self, capsys):
        assert run(["solve-params", "--beta", "0.95"]) == 0
        out = capsys.readouterr().out
        assert "PARAMS beta=0.95" in out
        assert "c=1.0027777777777778" in out

    @pytest.mark.parametrize("beta", ["0.5", "1.0"])
    def test_domain_error_exit_two(self, beta, capsys):
        assert run(["solve-params", "--beta", beta]) == 2
        err = capsys.readouterr().err
        assert "(0.5, 1)" in err

    def test_beta_one_message_explains_singularity(self, capsys):
        run(["solve-params", "--beta", "1.0"])
        assert "singular" in capsys.readouterr().err


class TestCurves:
    def test_csv_content(self, tmp_path, capsys):
        out = tmp_path / "curves.csv"
        assert run(["curves", "--beta", "0.95", "--step", "0.001",
                    "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "iou,loss_iou,grad_iou,loss_riou,grad_riou"
        assert len(lines) == 1 + 1001
        first = [float(v) for v in lines[1].split(",")]
        assert first == [0.0, 1.0, 1.0, 1.0, 0.0]
        last = [float(v) for v in lines[-1].split(",")]
        assert last[0] == 1.0
        assert last[1] == 0.0 and last[2] == 1.0
        assert abs(last[3]) < 1e-10 and abs(last[4]) < 1e-10
        # peak of the rectified gradient column sits at the grid point
        # nearest beta
        grads = [float(line.split(",")[4]) for line in lines[1:]]
        assert grads.index(max(grads)) == 950

    def test_byte_stable(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        run(["curves", "--step", "0.01", "--out", str(a)])
        run(["curves", "--step", "0.01", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_bad_step_exit_two(self, tmp_path):
        assert run(["curves", "--step", "0.5", "--out", str(tmp_path / "x.csv")]) == 2
        assert run(["curves", "--step", "0", "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_beta_exit_two(self, tmp_path):
        assert run(["curves", "--beta", "1.0", "--out", str(tmp_path / "x.csv")]) == 2

    def test_unwritable_path_exit_four(self, tmp_path):
        target = tmp_path / "missing_dir" / "x.csv"
        assert run(["curves", "--step", "0.01", "--out", str(target)]) == 4


class TestGradcheck:
    def test_ok(self, capsys):
        assert run(["gradcheck", "--trials", "50", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        for name in ("IOU", "GIOU", "DIOU", "RIOU"):
            assert name in out

    def test_deterministic_report(self, capsys):
        run(["gradcheck", "--trials", "20", "--seed", "5"])
        first = capsys.readouterr().out
        run(["gradcheck", "--trials", "20", "--seed", "5"])
        assert capsys.readouterr().out == first

    def test_bad_trials_exit_two(self):
        assert run(["gradcheck", "--trials", "0"]) == 2

    def test_sign_flip_mutant_exit_five(self, capsys, monkeypatch):
        real = losses.loss_gradient_boxes

        def flipped(pred, gt, kind):
            g = real(pred, gt, kind)
            return losses.BoxGradient(-g.x_min, -g.y_min, -g.x_max, -g.y_max)

        monkeypatch.setattr(losses, "loss_gradient_boxes", flipped)
        assert run(["gradcheck", "--trials", "10", "--seed", "1"]) == 5
        assert "worst pair" in capsys.readouterr().out


class TestSimulate:
    def test_ok_and_byte_stable(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path / "sim.json")
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        assert run(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
        summary = capsys.readouterr().out
        assert "mean final IoU" in summary
        assert "independent descent" in summary
        assert run(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
        for suffix in ("_histograms.csv", "_scalars.csv"):
            b1 = (tmp_path / ("r1" + suffix)).read_bytes()
            b2 = (tmp_path / ("r2" + suffix)).read_bytes()
            assert b1 == b2

    def test_scalars_echo_config(self, tmp_path):
        cfg = write_sim_config(tmp_path / "sim.json")
        out = tmp_path / "rep"
        run(["simulate", "--config", str(cfg), "--out", str(out)])
        text = (tmp_path / "rep_scalars.csv").read_text()
        assert "loss_kind,RIOU" in text
        assert "seed,7" in text
        assert "iou_distribution,0.1:0.4;" in text

    def test_missing_key_exit_two(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path / "sim.json", seed=None)
        assert run(["simulate", "--config", str(cfg)]) == 2
        assert "missing" in capsys.readouterr().err

    def test_unknown_key_exit_two(self, tmp_path):
        cfg = write_sim_config(tmp_path / "sim.json", momentum=0.9)
        assert run(["simulate", "--config", str(cfg)]) == 2

    def test_bad_beta_exit_two(self, tmp_path):
        cfg = write_sim_config(tmp_path / "sim.json", beta=1.0)
        assert run(["simulate", "--config", str(cfg)]) == 2

    def test_riou_without_beta_exit_two(self, tmp_path):
        cfg = write_sim_config(tmp_path / "sim.json", beta=None)
        assert run(["simulate", "--config", str(cfg)]) == 2

    def test_nonexistent_config_exit_two(self, tmp_path):
        assert run(["simulate", "--config", str(tmp_path / "nope.json")]) == 2

    def test_malformed_json_exit_two(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run(["simulate", "--config", str(path)]) == 2


class TestPyramid:
    def test_default_ok(self, capsys):
        assert run(["pyramid", "--input-size", "320"]) == 0
        out = capsys.readouterr().out
        assert "validation: ok" in out
        assert "P0:" in out

    def test_smoke_digests(self, capsys):
        assert run(["pyramid", "--input-size", "512", "--smoke", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "SMOKE_TOTAL" in out

    def test_levels_file(self, tmp_path, capsys):
        table = tmp_path / "levels.txt"
        table.write_text("# channels height width\n8 32 32\n8 16 16\n8 8 8\n8 4 4\n")
        assert run(["pyramid", "--levels", str(table), "--blocks", "2"]) == 0
        assert "level3" in capsys.readouterr().out

    def test_unbridgeable_levels_exit_three(self, tmp_path):
        table = tmp_path / "levels.txt"
        # the block-0 forward transfer 100 -> 30 is not reachable with any
        # stride in 1..4
        table.write_text("8 100 100\n8 30 30\n8 10 10\n8 5 5\n")
        assert run(["pyramid", "--levels", str(table), "--blocks", "2"]) == 3

    def test_too_few_levels_exit_two(self, tmp_path):
        table = tmp_path / "levels.txt"
        table.write_text("8 32 32\n8 16 16\n")
        assert run(["pyramid", "--levels", str(table), "--blocks", "1"]) == 2

    def test_malformed_levels_exit_two(self, tmp_path):
        table = tmp_path / "levels.txt"
        table.write_text("8 32\n")
        assert run(["pyramid", "--levels", str(table)]) == 2
