import io

import numpy as np
import pytest

from slidesum import bench, lanes
from slidesum.bench import (
    CSV_HEADER,
    BenchConfig,
    ConfigError,
    checksum_columns,
    fnv1a64,
    gen_filters,
    gen_input,
    splitmix64,
)
from slidesum.cli import main

MASK = (1 << 64) - 1


def splitmix64_ref(seed, n):
    # straight transcription with Python integers
    state, out = seed, []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


def fnv1a_ref(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & MASK
    return h


# data ------------------------------------------------------------------------


def test_splitmix64_reference_vector():
    assert int(splitmix64(0, 1)[0]) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("seed", [0, 1, 42, 2**63 + 12345, MASK])
def test_splitmix64_matches_scalar_reference(seed):
    assert [int(z) for z in splitmix64(seed, 200)] == splitmix64_ref(seed, 200)


def test_gen_input_mapping():
    z = splitmix64_ref(7, 50)
    assert gen_input(7, 50, "i64").tolist() == [(v >> 32) - 2**31 for v in z]
    assert gen_input(7, 50, "f64").tolist() == [(v >> 11) * 2.0**-52 - 1.0 for v in z]
    f32 = gen_input(7, 50, "f32")
    assert f32.dtype == np.float32
    assert f32.tolist() == [float(np.float32((v >> 40) * 2.0**-23 - 1.0)) for v in z]


@pytest.mark.parametrize("kind", ["i64", "f32", "f64"])
def test_gen_input_range_and_determinism(kind):
    a = gen_input(42, 100_000, kind)
    assert a.tobytes() == gen_input(42, 100_000, kind).tobytes()
    assert gen_input(43, 1, kind)[0] != a[0]
    if kind == "i64":
        assert a.min() >= -(2**31) and a.max() < 2**31
    else:
        assert a.min() >= -1.0 and a.max() < 1.0


def test_gen_input_rejects_empty():
    with pytest.raises(ValueError):
        gen_input(0, 0)


def test_gen_filters_has_exact_zeros():
    f = gen_filters(3, 4, 51)
    assert f.shape == (4, 51)
    assert np.all((f == 0) | (np.abs(f) >= 0.1))
    assert np.any(f == 0)


def test_fnv1a_matches_reference():
    assert fnv1a64(np.zeros(0, dtype=np.uint8)) == 0xCBF29CE484222325
    assert fnv1a64(np.frombuffer(b"a", dtype=np.uint8)) == 0xAF63DC4C8601EC8C
    x = gen_input(5, 999, "f32")
    assert fnv1a64(x) == fnv1a_ref(x.astype("<f4").tobytes())
    y = np.arange(10, dtype=">f8")
    assert fnv1a64(y) == fnv1a_ref(np.arange(10, dtype="<f8").tobytes())


def test_native_lanes_power_of_two():
    for kind in ("i64", "f32", "f64"):
        P = bench.native_lanes(kind)
        assert P >= 2 and P & (P - 1) == 0
    assert bench.native_lanes("f32") == 2 * bench.native_lanes("f64")


# config and CSV ----------------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [
        dict(reps=0),
        dict(warmup=-1),
        dict(N=0),
        dict(ws=[0]),
        dict(P=12),
        dict(algos=["quick"]),
        dict(kind="f16"),
        dict(command="sweep"),
        dict(op="gamma", kind="i64"),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        BenchConfig(**kw).validate()


def test_csv_header(tmp_path):
    assert ",".join(CSV_HEADER) == (
        "algo,op,kind,N,w,P,dilation,reps,best_ns_per_elem,median_ns_per_elem,speedup_vs_naive,checksum"
    )
    cfg = BenchConfig(op="add", kind="i64", N=5000, ws=[3], P=8, reps=2, warmup=0, out=tmp_path / "r.csv")
    bench.run_bench(cfg)
    bench.run_bench(cfg)
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3  # header once, then one row per run


def test_bench_records(tmp_path):
    cfg = BenchConfig(
        op="add", kind="f32", N=20_000, ws=[3, 5], P=8, reps=3, warmup=1,
        algos=["scalar_input", "ping_pong", "vector_slide"],
    )
    recs = bench.run_bench(cfg)
    assert [(r.algo, r.w) for r in recs] == [
        (a, w) for w in (3, 5) for a in ("scalar_input", "ping_pong", "vector_slide")
    ]
    for r in recs:
        assert r.best_ns_per_elem <= r.median_ns_per_elem
        assert r.speedup_vs_naive > 0
        assert len(r.checksum) == 16


def test_bench_skips_nothing_silently():
    # scalar_input cannot take w=9 at P=8: the run must fail, not drop the row
    cfg = BenchConfig(op="add", kind="f32", N=1000, ws=[9], P=8, reps=1, algos=["scalar_input"])
    with pytest.raises(ValueError, match="lane width too small"):
        bench.run_bench(cfg)


def test_sweep_records_and_summary():
    cfg = BenchConfig(command="sweep", N=4096, ws=[3, 5, 11], P=8, reps=1, warmup=0)
    recs, points = bench.run_sweep(cfg)
    assert [r.w for r in recs] == [3, 5, 11]
    assert all(r.op == "conv" and r.kind == "f32" for r in recs)
    assert all(np.isfinite(p.speedup) and p.speedup > 0 for p in points)
    assert all(p.speedup_vs_gemm and p.speedup_vs_gemm > 0 for p in points)
    text = bench.fmt_speedups(points)
    assert text.splitlines()[0] == "w,speedup_vs_naive,speedup_vs_gemm"


def test_checksums_stable_across_reps():
    cfg = BenchConfig(op="gamma", kind="f64", N=3000, ws=[4], P=8, reps=4, warmup=0)
    fn, _ = bench._kernel(cfg, "vector_slide", bench._inputs(cfg), 4)
    _, sums = bench._time(fn, 4, 0)
    assert len(set(sums)) == 1


def test_load_input(tmp_path):
    path = tmp_path / "x.bin"
    np.arange(10, dtype="<f4").tofile(path)
    assert bench.load_input(path, "f32", None).tolist() == list(range(10))
    assert bench.load_input(path, "f32", 4).tolist() == [0, 1, 2, 3]
    with pytest.raises(ConfigError):
        bench.load_input(path, "f32", 11)
    assert bench.load_input(path, "f64", None).shape == (5,)
    (tmp_path / "odd.bin").write_bytes(b"\x00" * 7)
    with pytest.raises(ConfigError):
        bench.load_input(tmp_path / "odd.bin", "f32", None)
    with pytest.raises(OSError):
        bench.load_input(tmp_path / "missing.bin", "f32", None)


# verify ----------------------------------------------------------------------


def test_verify_small_grid_passes():
    cfg = BenchConfig(command="verify", op="add", kind="i64", N=300, P=8)
    out = io.StringIO()
    assert bench.run_verify(cfg, out, suites=("sliding",)) == 0
    report = out.getvalue()
    assert "PASS sliding" in report
    assert "w=19" in report  # 2P+3 reaches the ring path of vector_slide
    assert "FAIL" not in report


def test_verify_conv_subset_passes():
    cfg = BenchConfig(command="verify", op="conv", kind="f32", ws=[3, 17], algos=["vector_slide", "gamma", "gemm"])
    out = io.StringIO()
    assert bench.run_verify(cfg, out, suites=("conv",)) == 0


def test_verify_catches_broken_slide_offset(monkeypatch):
    real = lanes.extract

    def off_by_one(buf, offset, P):
        return real(buf, max(offset - 1, 0), P)

    monkeypatch.setattr(lanes, "extract", off_by_one)
    cfg = BenchConfig(command="verify", op="add", kind="i64", N=200, P=8, algos=["vector_slide"])
    out = io.StringIO()
    assert bench.run_verify(cfg, out, suites=("sliding",)) != 0
    assert "FAIL" in out.getvalue()


# CLI -------------------------------------------------------------------------


def test_cli_exit_ok(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    assert main(["bench", "--op", "max", "--kind", "i64", "--n", "2000", "--w", "5", "--lanes", "8",
                 "--reps", "1", "--out", str(csv_path)]) == 0
    assert csv_path.read_text().startswith("algo,op,kind")
    assert main(["verify", "--op", "min", "--kind", "i64", "--n", "100", "--lanes", "4",
                 "--suite", "sliding"]) == 0


def test_cli_exit_verify_failure(monkeypatch, capsys):
    monkeypatch.setattr(lanes, "extract", lambda buf, offset, P: buf[offset + 1 : offset + 1 + P])
    assert main(["verify", "--op", "add", "--kind", "i64", "--n", "100", "--lanes", "4",
                 "--algo", "vector_slide", "--suite", "sliding"]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["bench", "--reps", "0"],
        ["bench", "--lanes", "6"],
        ["bench", "--op", "conv", "--kind", "i64"],
        ["bench", "--algo", "gemm", "--op", "add", "--n", "100", "--w", "3"],
        ["bench", "--op", "add", "--n", "10", "--w", "11", "--lanes", "8"],
    ],
)
def test_cli_exit_config_error(argv, capsys):
    assert main(argv) == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_exit_io_error(tmp_path, capsys):
    assert main(["bench", "--input", str(tmp_path / "nope.bin"), "--w", "3"]) == 3
    assert "nope.bin" in capsys.readouterr().err
    assert main(["bench", "--n", "100", "--w", "3", "--reps", "1",
                 "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 3


def test_cli_raw_input(tmp_path, capsys):
    path = tmp_path / "data.bin"
    (np.arange(64, dtype="<i8") - 30).tofile(path)
    out = tmp_path / "o.csv"
    assert main(["bench", "--op", "add", "--kind", "i64", "--input", str(path), "--w", "4",
                 "--lanes", "8", "--reps", "1", "--out", str(out)]) == 0
    row = out.read_text().splitlines()[1].split(",")
    assert row[3] == "64"
    expected = np.convolve(np.arange(64) - 30, np.ones(4, dtype=np.int64), mode="valid")
    assert row[-1] == f"{fnv1a64(expected.astype(np.int64)):016x}"


def test_cli_sweep_labels_default_n(monkeypatch, capsys):
    seen = {}

    def fake_sweep(cfg):
        seen["cfg"] = cfg
        return [], []

    monkeypatch.setattr(bench, "run_sweep", fake_sweep)
    assert main(["sweep"]) == 0
    assert seen["cfg"].ws == list(bench.FIG1_WINDOWS)
    assert "N=2^22" in capsys.readouterr().out


def test_cli_sweep_determinism(tmp_path, capsys):
    args = ["sweep", "--seed", "42", "--n", "8192", "--w", "3", "--w", "17", "--lanes", "8", "--reps", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert checksum_columns(a) == checksum_columns(b)
