import math

import pytest

import sparsegraphcodec as sgc

TWO_BLOCK = {"kind": "block", "p": [0.5, 0.5], "B": [[1.5, 0.5], [0.5, 1.5]]}


def test_roundtrip_sampled_graph():
    g = sgc.sample(TWO_BLOCK, 300, 0.03, seed=4)
    data, report = sgc.encode(g)
    assert isinstance(data, bytes)
    assert data[:4] == b"SGC1"
    assert report["m"] == g.m
    assert report["total_bits"] == 8 * len(data)
    assert sgc.decode(data) == g


def test_graph_from_edges():
    g = sgc.Graph(4, [(2, 0), (1, 3)])
    assert (g.n, g.m) == (4, 2)
    assert g.edges() == [(0, 2), (1, 3)]
    assert g.has_edge(0, 2) and not g.has_edge(0, 1)
    with pytest.raises(ValueError):
        sgc.Graph(3, [(0, 0)])


def test_decoder_errors():
    data, _ = sgc.encode(sgc.Graph(5, [(0, 1), (2, 3)]), policy="fixed:1", mode="exact")
    with pytest.raises(sgc.MalformedStream):
        sgc.decode(data[:-1])
    with pytest.raises(sgc.VersionError):
        sgc.decode(b"XXXX" + data[4:])


def test_subset_rank_roundtrip():
    elements = [3, 17, 40, 999]
    r = sgc.rank_subset(elements, 1000)
    assert r == sum(math.comb(e, i + 1) for i, e in enumerate(elements))
    assert sgc.unrank_subset(r, 1000, 4) == elements
    big = list(range(0, 4000, 7))
    r = sgc.rank_subset(big, 5000)
    assert r.bit_length() > 64
    assert sgc.unrank_subset(r, 5000, len(big)) == big


def test_analysis_helpers():
    assert sgc.s_of_d(2.0) == pytest.approx(1 - math.log(2))
    assert sgc.er_entropy_gap(0.01) == pytest.approx(-99 * math.log1p(-0.01))
    assert sgc.graphon_entropy({"kind": "block", "p": [1.0], "B": [[1.0]]}) == pytest.approx(0.0)
    assert sgc.graphon_entropy(TWO_BLOCK) > 0


def test_ls_fit_two_triangles():
    g = sgc.Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    fit = sgc.ls_fit(g, 2.0)
    assert fit["classes"] == 2
    assert fit["assignment"] == [0, 0, 0, 1, 1, 1]
    assert fit["objective"] == pytest.approx(1 / 3)


def test_trend_rows():
    rows = sgc.run_trend("density-convergence", {"grid": [40, 80], "rho": 0.1, "seed": 3})
    assert [r["n"] for r in rows] == [40, 80]
    assert all(r["m_bar"] == pytest.approx(r["n"] * (r["n"] - 1) / 2 * 0.1) for r in rows)
