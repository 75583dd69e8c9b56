"""Generate a synthetic brat corpus, ingest it, run a two-fold Combo2
experiment, then extract events from a raw sentence with the saved model.

    python demos/quickstart.py [work_dir]
"""
import json
import sys
import tempfile
from pathlib import Path

from oilevents.cli import main
from oilevents.synthetic import generate_standoff, write_standoff


def run(work: Path) -> None:
    brat = work / "brat"
    write_standoff(brat, generate_standoff(120, seed=0))
    assert main(["ingest", str(brat), str(work / "corpus.json")]) == 0

    config = json.loads((Path(__file__).parent / "config.json").read_text())
    config["corpus"] = str(work / "corpus.json")
    config["output_dir"] = str(work / "runs")
    (work / "config.json").write_text(json.dumps(config, indent=1))
    assert main(["train", str(work / "config.json"), "--run-name", "demo"]) == 0

    model = work / "runs" / "demo" / "model"
    main(["predict", str(model), "--text", "Brent crude did not fall sharply on Monday after OPEC cut output ."])


if __name__ == "__main__":
    if len(sys.argv) > 1:
        target = Path(sys.argv[1])
        target.mkdir(parents=True, exist_ok=True)
        run(target)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            run(Path(tmp))
