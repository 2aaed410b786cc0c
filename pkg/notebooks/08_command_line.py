# %% [markdown]
# # Files and the command line
#
# Designs are stored as JSON chain files.  The `chainsmith` command designs,
# simulates, extends and checks them; here it is driven through `main` so the
# notebook stays self-contained.

# %%
import json
import tempfile
from pathlib import Path

from chainsmith.cli import main

work = Path(tempfile.mkdtemp())
chain = work / "pair.json"
main(["design", "last-k", "--n", "15", "--alpha", "9:1,15:1", "--out", str(chain)])
print(json.dumps(json.loads(chain.read_text())["meta"], indent=1)[:400])

# %%
main(["simulate", "--chain", str(chain), "--steps", "3", "--out", str(work / "p.csv")])
print((work / "p.csv").read_text())

# %%
main(["verify", "--chain", str(chain)])
main(["robustness", "--chain", str(chain), "--eps", "0.01,0.02", "--trials", "2000"])
