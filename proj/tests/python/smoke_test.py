"""Smoke tests for the ntc python module (built by CMake / scikit-build-core)."""

import math
import sys

import ntc


def check(cond, what):
    if not cond:
        print(f"FAIL: {what}")
        sys.exit(1)
    print(f"ok: {what}")


def main():
    check(abs(ntc.compression_ratio(100, 25) - 4.0) < 1e-12, "compression_ratio")
    r = ntc.pearson([1.0, 2.0, 3.0], [2.0, 4.0, 7.0])
    check(abs(r - 0.9933992677987828) < 1e-12, "pearson")

    topo = ntc.Topology.nsfnet()
    check(topo.num_nodes == 14 and topo.num_links == 42, "nsfnet topology")

    data = ntc.gen_synthetic(spatial_pct=100, temporal_pct=100, bins=60, seed=7)
    check(data.num_bins == 60 and data.num_links == 42, "gen_synthetic shape")

    rep = ntc.correlation_report(data)
    check(rep["median_abs_pearson"] > 0.9, "high correlation at 100/100")

    blob = ntc.compress(data, method="adaptive_ac", w_past=4)
    back = ntc.decompress(blob)
    check(back == data, "adaptive round trip")
    check(len(blob) < ntc.raw_matrix_bytes(data), "adaptive compresses")

    small = ntc.Topology(2, [(0, 1), (1, 0)])
    rows = [[(t * 7) % 50, (t * 3) % 40] for t in range(40)]
    ds = ntc.TrafficDataset(small, rows)
    model = ntc.train(ds, kind="rnn", epochs=2, hidden=4, w_past=3, seed=5)
    check(model.kind == "rnn" and model.w_past == 3, "train returns a model")
    blob2 = ntc.compress(ds, method="rnn", model=model)
    check(ntc.decompress(blob2, model) == ds, "rnn round trip")

    g = ntc.gen_synthetic(spatial_pct=0, bins=60, seed=3)
    lo = ntc.correlation_report(g)["median_abs_pearson"]
    check(lo < rep["median_abs_pearson"], "spatial knob moves correlation")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
