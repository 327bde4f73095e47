"""A toy corpus through the command-line domain analysis.

Six networks from each of two mechanisms are written to a temporary
directory with an index file; `graphlet-lp domains` fits one model per
network, projects the SHAP signatures to 2D and tests whether each domain
clusters more tightly than random subsets of the corpus.

Run: python3 demos/04_domain_map.py     (a couple of minutes)
"""

import pathlib
import tempfile

from graphlet_lp.cli import main
from graphlet_lp.graph import write_edge_list
from graphlet_lp.synthetic import preferential_attachment, triadic_closure

with tempfile.TemporaryDirectory() as tmp:
    root = pathlib.Path(tmp)
    rows = ["path,name,domain,subdomain"]
    for i in range(6):
        for domain, make in (("closure", triadic_closure), ("attachment", preferential_attachment)):
            name = f"{domain}{i}"
            write_edge_list(make(500, seed=i), root / f"{name}.txt")
            rows.append(f"{name}.txt,{name},{domain},")
    (root / "index.csv").write_text("\n".join(rows) + "\n")

    code = main(["domains", str(root / "index.csv"), "--out", str(root / "out"), "--signature", "abs"])
    print("exit code", code)
    print((root / "out" / "clustering.csv").read_text())
    print((root / "out" / "pca.csv").read_text())
