"""End-to-end experiment through the command-line interface.

Writes a config file, runs `ewhi run`, regenerates plot data with
`ewhi plotdata`, and prints what landed on disk.  The same commands work
from a shell; this script drives them through the entry point function.
"""
import tempfile
from pathlib import Path

from ewhi.cli import main

workdir = Path(tempfile.mkdtemp(prefix="ewhi-demo-"))
config = workdir / "small.cfg"
config.write_text(
    """\
# one-dimensional smoke problem, flat weight over a box covering its image
problem = toy-sphere-pair
weight = uniform
weight.box = 0:1.2 0:1.2
n_init = 5
n_iterations = 5
m_x = 200
m_y = 200
seed = 11
output = {out}
""".format(out=workdir / "run")
)

print("running:", config)
code = main(["run", str(config)])
print("run exit code:", code)

code = main(["plotdata", str(workdir / "run")])
print("plotdata exit code:", code)

for path in sorted((workdir / "run").iterdir()):
    print(f"  {path.name:22s} {path.stat().st_size:6d} bytes")

history = (workdir / "run" / "history.csv").read_text().splitlines()
print("history header:", history[0])
print("last row:      ", history[-1])
print("verification suite:")
main(["verify"])
