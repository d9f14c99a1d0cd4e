"""Smoke test for the cbp extension module. Run with pytest or as a script."""

import json

import cbp


def test_path_of_three_halves():
    sizes = ["1/2", 0.5, "0.5"]
    edges = [(0, 1), (1, 2)]
    assert "bipartite" in cbp.graph_classes(sizes, edges)
    bins = cbp.solve(sizes, edges, "abs_bpb")
    assert sorted(sorted(b) for b in bins) == [[0, 2], [1]]
    assert cbp.verify(sizes, edges, bins)
    assert not cbp.verify(sizes, edges, [[0, 1], [2]])
    assert cbp.optimum(sizes, edges) == 2


def test_every_algorithm_on_a_split_graph():
    spec = json.dumps({"class": "split", "n": 10, "density": 0.4, "seed": 7})
    inst = json.loads(cbp.generate(spec))
    sizes = [item["size"] for item in inst["items"]]
    edges = [tuple(e) for e in inst["edges"]]
    opt = cbp.optimum(sizes, edges)
    for algo in cbp.ALGORITHMS:
        if algo in ("abs_bpb", "multipartite_pack") and algo not in _applicable(sizes, edges):
            continue
        bins = cbp.solve(sizes, edges, algo)
        assert cbp.verify(sizes, edges, bins), algo
        assert len(bins) >= opt


def _applicable(sizes, edges):
    classes = cbp.graph_classes(sizes, edges)
    out = []
    if "bipartite" in classes:
        out.append("abs_bpb")
    if "complete-multipartite" in classes:
        out.append("multipartite_pack")
    return out


def test_errors():
    try:
        cbp.solve(["3/2"], [])
    except ValueError:
        pass
    else:
        raise AssertionError("size above 1 accepted")
    five_cycle = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]
    try:
        cbp.solve(["1/5"] * 5, five_cycle, "color_sets")
    except NotImplementedError:
        pass
    else:
        raise AssertionError("unsupported graph accepted")


def test_solve_json_round_trip():
    text = '{"items":[{"id":10,"size":"3/5"},{"id":20,"size":"3/5"}],"edges":[]}'
    packing = json.loads(cbp.solve_json(text, "exact"))
    assert sorted(packing["bins"]) == [[10], [20]]


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
    print("ok")
