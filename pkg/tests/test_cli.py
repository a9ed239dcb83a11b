import json

import numpy as np
import pytest

from forgescan.cli import default_jobs, draw_overlay, main
from forgescan.imaging import load_image, load_mask, save_image
from forgescan.regions import Region


@pytest.fixture
def photo(tmp_path, rng):
    img = rng.integers(0, 256, (64, 80, 3)).astype(np.uint8)
    img[20:44, 24:56] = 200
    p = tmp_path / "in.png"
    save_image(img, p)
    return p


def test_block(photo, tmp_path, capsys):
    mask, rep = tmp_path / "m.png", tmp_path / "r.json"
    assert main(["block", "--image", str(photo), "--mask-out", str(mask), "--report", str(rep)]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 3
    data = json.loads(rep.read_text())
    assert data["schema_version"] == "1" and data["block_grid"] == {"bw": 10, "bh": 8}
    counts = [s["marked"] for s in data["sweep"]]
    assert counts == sorted(counts, reverse=True)
    assert load_mask(mask).shape == (64, 80)


def test_direction(photo, tmp_path, capsys):
    mask, ov, rep = tmp_path / "m.png", tmp_path / "o.png", tmp_path / "r.json"
    rc = main(["direction", "--image", str(photo), "--mask-out", str(mask), "--overlay-out", str(ov),
               "--report", str(rep), "--window", "3x7"])
    assert rc == 0
    data = json.loads(rep.read_text())
    assert data["params"]["win_w"] == 7 and data["size"] == [80, 64]
    assert load_image(ov).shape == (64, 80, 3)
    assert len(capsys.readouterr().out.strip().splitlines()) == len(data["regions"])


def test_synth_and_eval(tmp_path, capsys):
    corpus = tmp_path / "c"
    assert main(["synth", "--n", "4", "--seed", "9", "--out", str(corpus), "--size", "64..80"]) == 0
    assert len((corpus / "manifest.jsonl").read_text().splitlines()) == 8
    rep, csv = tmp_path / "e.json", tmp_path / "e.csv"
    assert main(["eval", "--corpus", str(corpus), "--detector", "block", "--params", '{"threshold": 55}',
                 "--report", str(rep), "--csv", str(csv)]) == 0
    assert json.loads(rep.read_text())["params"]["threshold"] == 55
    assert csv.read_text().splitlines()[0] == "group,n,precision,recall"


def test_eval_params_file(tmp_path):
    main(["synth", "--n", "2", "--out", str(tmp_path / "c"), "--size", "64..64"])
    pf = tmp_path / "p.json"
    pf.write_text('{"min_area": 16}')
    rep = tmp_path / "e.json"
    assert main(["eval", "--corpus", str(tmp_path / "c"), "--detector", "direction",
                 "--params", str(pf), "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["params"]["min_area"] == 16


def test_recompress(photo, tmp_path):
    out = tmp_path / "q.png"
    assert main(["recompress", "--image", str(photo), "--quality", "75", "--out", str(out)]) == 0
    assert load_image(out).shape == (64, 80)


@pytest.mark.parametrize("argv", [["bogus"], ["block", "--frobnicate"], ["block"],
                                  ["recompress", "--image", "x", "--quality", "0", "--out", "y"],
                                  ["block", "--image", "x", "--sweep", "a,b"]])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_missing_input_exits_1(tmp_path, capsys):
    assert main(["block", "--image", str(tmp_path / "nope.png")]) == 1
    assert "nope.png" in capsys.readouterr().err


def test_bad_params_exit_1(tmp_path, capsys):
    main(["synth", "--n", "1", "--out", str(tmp_path / "c"), "--size", "64..64"])
    assert main(["eval", "--corpus", str(tmp_path / "c"), "--detector", "block",
                 "--params", '{"nope": 1}']) == 1


def test_small_image_exits_1(tmp_path, capsys):
    p = tmp_path / "s.png"
    save_image(np.zeros((8, 8), np.uint8), p)
    assert main(["block", "--image", str(p)]) == 1


def test_failed_run_leaves_no_partial_file(tmp_path, capsys):
    target = tmp_path / "out.png"
    target.write_bytes(b"old")
    assert main(["recompress", "--image", str(tmp_path / "missing.png"), "--quality", "50",
                 "--out", str(target)]) == 1
    assert target.read_bytes() == b"old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.png"]


def test_repeat_runs_identical(photo, tmp_path):
    outs = []
    for k in range(2):
        m, r = tmp_path / f"m{k}.png", tmp_path / f"r{k}.json"
        main(["direction", "--image", str(photo), "--mask-out", str(m), "--report", str(r)])
        outs.append((m.read_bytes(), r.read_text().replace(f"m{k}.png", "")))
    assert outs[0] == outs[1]


def test_default_jobs_env(monkeypatch):
    monkeypatch.setenv("FORGESCAN_JOBS", "3")
    assert default_jobs() == 3
    monkeypatch.setenv("FORGESCAN_JOBS", "lots")
    assert default_jobs() >= 1


def test_overlay_outline():
    img = np.zeros((20, 20), np.uint8)
    out = draw_overlay(img, [Region(5, 5, 10, 8, 80)])
    assert (out[5, 5:15] == (255, 0, 0)).all() and (out[9, 10] == 0).all()
