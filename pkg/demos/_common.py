import importlib.resources

from graphlet_lp import load_edge_list


def bundled(name):
    return load_edge_list(str(importlib.resources.files("graphlet_lp") / "data" / f"{name}.txt"))
