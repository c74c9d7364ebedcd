"""Shared argument handling for the reproduction scripts."""

import argparse
import json
import logging
from pathlib import Path


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--full-scale", action="store_true", help="1000 BSs and 10 repetitions instead of desk scale")
    p.add_argument("--trials", type=int, help="override the number of repetitions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return p


def scale(args, **extra) -> dict:
    kw = {"seed": args.seed, "workers": args.workers, **extra}
    if args.full_scale:
        kw.update(expected_bs=1000, trials=10)
    if args.trials is not None:
        kw["trials"] = args.trials
    return kw


def dump(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, default=float) + "\n")
    logging.getLogger(__name__).info("wrote %s", path)
