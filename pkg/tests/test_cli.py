import shutil

import numpy as np
import pytest

from lrimg.cli import main
from lrimg.image import load_image


@pytest.fixture
def dog(corpus_dir, tmp_path):
    dst = tmp_path / "dog.pgm"
    shutil.copy(corpus_dir / "dog.pgm", dst)
    return dst


def test_compress_decompress_roundtrip(dog, tmp_path, capsys):
    lrif = tmp_path / "dog.lrif"
    out = tmp_path / "dog-out.pgm"
    assert main(["compress", str(dog), str(lrif), "--tolerance", "0.1"]) == 0
    assert lrif.exists()
    assert main(["decompress", str(lrif), str(out)]) == 0
    original = load_image(dog)
    approx = load_image(out)
    assert (approx.height, approx.width) == (original.height, original.width)


def test_compress_at_rank(dog, tmp_path):
    lrif = tmp_path / "dog.lrif"
    assert main(["compress", str(dog), str(lrif), "--rank", "5"]) == 0
    from lrimg.lowrank import decode_lrif

    assert decode_lrif(lrif.read_bytes()).ranks == (5,)


def test_info(dog, tmp_path, capsys):
    lrif = tmp_path / "dog.lrif"
    main(["compress", str(dog), str(lrif), "--rank", "7"])
    capsys.readouterr()
    assert main(["info", str(lrif)]) == 0
    out = capsys.readouterr().out
    assert "64x80" in out and "[7]" in out


def test_errormap(dog, tmp_path):
    lrif = tmp_path / "dog.lrif"
    out = tmp_path / "approx.pgm"
    emap = tmp_path / "errmap.pgm"
    main(["compress", str(dog), str(lrif), "--rank", "5"])
    main(["decompress", str(lrif), str(out)])
    assert main(["errormap", str(dog), str(out), str(emap)]) == 0
    m = load_image(emap)
    assert m.channels == 1
    assert m.planes[0].max() == 255  # per-map max normalization


def test_sweep_outputs_csv(dog, capsys):
    assert main(["sweep", str(dog), "--grid", "0.1,0.5", "--mode", "factor"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("image_id,method,tolerance")
    assert len(lines) == 3
    assert all("svd-factor" in line for line in lines[1:])


def test_bench_and_plot(dog, tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    shutil.copy(dog, corpus / "dog.pgm")
    cfg = tmp_path / "run.cfg"
    outdir = tmp_path / "out"
    cfg.write_text(
        f"output_dir = {outdir}\ngrid = 0.1,0.5,0.9\nmethods = svd-factor,jpeg\n"
    )
    assert main(["bench", str(corpus), "--config", str(cfg)]) == 0
    assert (outdir / "records.csv").exists()
    assert (outdir / "curves.svg").exists()
    replot = tmp_path / "replot.svg"
    assert main(["plot", str(outdir / "curves.csv"), str(replot)]) == 0
    assert replot.read_text().startswith("<svg")


def test_decompress_corrupt_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.lrif"
    bad.write_bytes(b"LRIF" + b"\x00" * 3)
    rc = main(["decompress", str(bad), str(tmp_path / "out.pgm")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_errors(dog, tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    shutil.copy(dog, corpus / "dog.pgm")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"output_dir = {tmp_path / 'out'}\nwat = 1\n")
    rc = main(["bench", str(corpus), "--config", str(cfg)])
    assert rc == 1
    assert "wat" in capsys.readouterr().err
