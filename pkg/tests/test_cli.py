import pytest

from beliefcrowd.campaign import Campaign, Question, Response, parse_campaign_csv, read_truth_csv, write_campaign_csv
from beliefcrowd.cli import main
from beliefcrowd.evidential import Frame


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--questions", "12", "--seed", "3", "--out", str(d / "c.csv"),
                 "--truth-out", str(d / "t.csv")]) == 0
    return d


def test_simulate_writes_campaign_and_truth(data):
    c = parse_campaign_csv(data / "c.csv")
    assert len(c.contributors) == 48 and len(c.task_questions) == 12
    assert set(read_truth_csv(data / "t.csv")) == set(c.contributors)


def test_profile_and_aggregate(data, capsys):
    assert main(["profile", "--in", str(data / "c.csv"), "--out", str(data / "p.csv")]) == 0
    assert "Expert=" in capsys.readouterr().out
    assert main(["aggregate", "--in", str(data / "c.csv"), "--profiles", str(data / "p.csv"),
                 "--rule", "lns", "--out", str(data / "d.csv")]) == 0
    assert capsys.readouterr().out.startswith("crowd_crr=")
    assert (data / "d.csv").read_text().startswith("question_id,decided,gold")


def test_learning_commands(data, capsys):
    assert main(["learn-profile-alphas", "--in", str(data / "c.csv"), "--grid-max", "2",
                 "--truth", str(data / "t.csv")]) == 0
    assert capsys.readouterr().out.startswith("alphas=")
    assert main(["learn-discounts", "--in", str(data / "c.csv"), "--profiles", str(data / "t.csv")]) == 0
    assert capsys.readouterr().out.startswith("discounts=")


def test_baselines(data):
    assert main(["baselines", "--in", str(data / "c.csv"), "--out", str(data / "b.csv")]) == 0
    assert len((data / "b.csv").read_text().splitlines()) == 49


def test_compare_is_reproducible(data):
    args = ["compare", "--in", str(data / "c.csv"), "--sizes", "2,5,10", "--reps", "3",
            "--methods", "mv,em,monitor,mean09,rjab"]
    assert main(args + ["--out", str(data / "r1.csv"), "--dat", str(data / "r1.dat")]) == 0
    assert main(args + ["--out", str(data / "r2.csv"), "--workers", "2"]) == 0
    assert (data / "r1.csv").read_bytes() == (data / "r2.csv").read_bytes()
    assert len((data / "r1.csv").read_text().splitlines()) == 1 + 15


def test_em_on_mixed_frames_is_inapplicable(tmp_path, capsys):
    qs = (Question("q1", Frame(("a", "b")), "a"), Question("q2", Frame(("a", "b", "c")), "c"))
    rs = tuple(Response(f"u{i}", q.id, 1, 6, 1.0) for i in range(3) for q in qs)
    write_campaign_csv(Campaign(qs, rs), tmp_path / "mixed.csv")
    code = main(["compare", "--in", str(tmp_path / "mixed.csv"), "--sizes", "2", "--reps", "1",
                 "--methods", "em", "--out", str(tmp_path / "o.csv")])
    assert code == 3 and "inapplicable" in capsys.readouterr().err
    # MV still works on the same file
    assert main(["compare", "--in", str(tmp_path / "mixed.csv"), "--sizes", "2", "--reps", "1",
                 "--methods", "mv", "--out", str(tmp_path / "o.csv")]) == 0


def test_bad_input_exits_2(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("contributor_id,question_id\nu,q\n")
    assert main(["aggregate", "--in", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "o.csv")]) == 2
    assert main(["profile", "--in", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o.csv")]) == 2
    assert main(["aggregate", "--in", str(tmp_path / "bad.csv"), "--discounts", "1,2",
                 "--out", str(tmp_path / "o.csv")]) == 2
    assert "error:" in capsys.readouterr().err


def test_compare_rejects_sizes_beyond_crowd(data):
    assert main(["compare", "--in", str(data / "c.csv"), "--sizes", "60", "--reps", "1",
                 "--methods", "mv", "--out", str(data / "x.csv")]) == 2


def test_module_entry_point(data):
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "beliefcrowd", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "compare" in out.stdout
