"""Binary netpbm images and the text filter-bank/histogram formats."""

import numpy as np
import pytest

from avsearch.backprojection import ColorHistogram, build_histogram
from avsearch.io_formats import (load_filter_bank, load_histogram, read_pgm,
                                 read_ppm, save_filter_bank, save_histogram,
                                 save_saliency_pgm, write_depth_pgm,
                                 write_pgm, write_pgm16, write_ppm)
from avsearch.saliency import learn_filter_bank
from avsearch.segmentation import TargetTemplate


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, (7, 11, 3)).astype(np.uint8)
    p = tmp_path / "img.ppm"
    write_ppm(p, rgb)
    np.testing.assert_array_equal(read_ppm(p), rgb)
    raw = p.read_bytes()
    assert raw.startswith(b"P6\n11 7\n255\n")
    assert len(raw) == len(b"P6\n11 7\n255\n") + 7 * 11 * 3


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    gray = rng.integers(0, 256, (5, 9)).astype(np.uint8)
    p = tmp_path / "img.pgm"
    write_pgm(p, gray)
    out = read_pgm(p)
    assert out.dtype == np.uint8
    np.testing.assert_array_equal(out, gray)


def test_pgm16_big_endian_and_round_trip(tmp_path):
    vals = np.array([[0, 1, 255], [256, 65534, 65535]], np.int64)
    p = tmp_path / "depth.pgm"
    write_pgm16(p, vals)
    raw = p.read_bytes()
    header = b"P5\n3 2\n65535\n"
    assert raw.startswith(header)
    payload = raw[len(header):]
    assert payload[:2] == b"\x00\x00"
    assert payload[2:4] == b"\x00\x01"      # big endian: high byte first
    assert payload[6:8] == b"\x01\x00"      # 256 -> 0x0100
    out = read_pgm(p)
    assert out.dtype == np.uint16
    np.testing.assert_array_equal(out, vals.astype(np.uint16))


def test_depth_pgm_centimeter_units(tmp_path):
    depth_mm = np.array([[0.0, 10.0, 14.9], [15.0, 987.0, 1e9]])
    p = tmp_path / "depth.pgm"
    write_depth_pgm(p, depth_mm)
    out = read_pgm(p)
    # mm -> cm with rounding; enormous values clamp at the 16-bit cap.
    np.testing.assert_array_equal(out, [[0, 1, 1], [2, 99, 65535]])


def test_pgm16_clamps_negative(tmp_path):
    p = tmp_path / "neg.pgm"
    write_pgm16(p, np.array([[-5, 70000]]))
    np.testing.assert_array_equal(read_pgm(p), [[0, 65535]])


def test_pnm_header_comments_and_whitespace(tmp_path):
    p = tmp_path / "c.ppm"
    payload = bytes(range(12))
    p.write_bytes(b"P6\n# a comment line\n2 # trailing\n2\n255\n" + payload)
    img = read_ppm(p)
    assert img.shape == (2, 2, 3)
    np.testing.assert_array_equal(img.ravel(), np.frombuffer(payload, np.uint8))


def test_pnm_error_cases(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P6\n2 2\n255\n\x00\x00\x00")  # payload cut short
    with pytest.raises(ValueError):
        read_ppm(p)
    p.write_bytes(b"P5\n1 1\n255\n\x00")
    with pytest.raises(ValueError):
        read_ppm(p)  # magic mismatch
    p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(ValueError):
        read_pgm(p)  # magic mismatch the other way
    p.write_bytes(b"P6\n2")
    with pytest.raises(ValueError):
        read_ppm(p)  # truncated header


def test_filter_bank_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    patches = rng.standard_normal((200, 2, 2, 3)) \
        + rng.standard_normal((200, 1, 1, 3))
    bank = learn_filter_bank(patches, n_filters=5, seed=0)
    p = tmp_path / "bank.txt"
    save_filter_bank(p, bank)
    with open(p) as fh:
        assert fh.readline() == "AIM-FILTERS 5 2\n"
    loaded = load_filter_bank(p)
    assert loaded.n_filters == 5 and loaded.patch_edge == 2
    np.testing.assert_array_equal(loaded.whitening, bank.whitening)
    np.testing.assert_array_equal(loaded.filters, bank.filters)


def test_filter_bank_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("NOT-A-BANK 3 2\n")
    with pytest.raises(ValueError):
        load_filter_bank(p)
    p.write_text("AIM-FILTERS 2 2\n" + "0.0 " * 11 + "0.0\n")
    with pytest.raises(ValueError):
        load_filter_bank(p)  # row count mismatch


def test_histogram_round_trip(tmp_path):
    rgb = np.tile(np.array([180, 60, 30], np.uint8), (16, 16, 1))
    rgb[:8] = [20, 140, 200]
    tpl = TargetTemplate(rgb=rgb, mask=np.ones((16, 16), bool))
    hist = build_histogram(tpl, bins_per_channel=4)
    p = tmp_path / "hist.txt"
    save_histogram(p, hist)
    with open(p) as fh:
        assert fh.readline() == "HIST3D 4\n"
    loaded = load_histogram(p)
    assert loaded.bins_per_channel == 4
    np.testing.assert_array_equal(loaded.weights, hist.weights)


def test_histogram_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("HIST2D 4\n")
    with pytest.raises(ValueError):
        load_histogram(p)
    p.write_text("HIST3D 2\n" + "0.125\n" * 7)
    with pytest.raises(ValueError):
        load_histogram(p)  # 7 values for 8 bins


def test_saliency_pgm_minmax(tmp_path):
    sal = np.array([[2.0, 4.0], [6.0, 2.0]])
    p = tmp_path / "sal.pgm"
    save_saliency_pgm(p, sal)
    out = read_pgm(p)
    np.testing.assert_array_equal(out, [[0, 128], [255, 0]])
    save_saliency_pgm(p, np.full((3, 3), 1.5))  # constant map -> all zero
    np.testing.assert_array_equal(read_pgm(p), np.zeros((3, 3), np.uint8))
