#!/usr/bin/env python3
"""Writes the bundled synthetic corpus and raw teacher traces.

Each example has a planted difficulty d in 1..10. Teacher traces carry
k = max(1, d + noise) steps in one of several formatting styles, with a few
adversarial traits (nested sub-lists, inline math, code fences).
"""

import argparse
import json
import random
from pathlib import Path

TASKS = ["math", "multihop-qa", "logic"]
FILLER = ("we note that the quantity follows from the previous line and carry "
          "the value forward while checking units and signs carefully").split()


def sentence(rng, lo=4, hi=14):
    words = [rng.choice(FILLER) for _ in range(rng.randint(lo, hi))]
    if rng.random() < 0.2:
        words.insert(rng.randrange(len(words) + 1), "$x_%d + 1 = %d$" % (rng.randint(1, 9), rng.randint(2, 99)))
    return " ".join(words).capitalize() + "."


def render(rng, k, style):
    steps = [sentence(rng) for _ in range(k)]
    if style == "numbered":
        lines = []
        for i, s in enumerate(steps, 1):
            lines.append(f"{i}. {s}")
            if rng.random() < 0.15:
                lines.append(f"   - sub point: {sentence(rng, 2, 5)}")
                lines.append(f"   - sub point: {sentence(rng, 2, 5)}")
        body = "\n".join(lines)
    elif style == "paren":
        body = "\n".join(f"{i}) {s}" for i, s in enumerate(steps, 1))
    elif style == "labeled":
        sep = "\n" if rng.random() < 0.7 else " "
        body = sep.join(f"Step {i}: {s}" for i, s in enumerate(steps, 1))
    elif style == "bulleted":
        marker = rng.choice(["-", "*"])
        body = "\n".join(f"{marker} {s}" for s in steps)
    else:
        body = "\n\n".join(steps)
    if rng.random() < 0.25:
        body = "Let us work through this.\n" + body
    if rng.random() < 0.1:
        body += "\n\n```\n1. not a step\n2. still not a step\n```"
    return body


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/synthetic")
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--samples", type=int, default=3)
    ap.add_argument("--seed", type=int, default=20240501)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    styles = ["numbered", "numbered", "numbered", "paren", "labeled", "labeled", "bulleted", "paragraph"]

    corpus, traces = [], []
    for i in range(args.n):
        d = rng.randint(1, 10)
        ex_id = f"syn-{i:04d}"
        corpus.append({
            "id": ex_id,
            "task": rng.choice(TASKS),
            "prompt": f"[depth={d}] Synthetic problem {i}: {sentence(rng)}",
            "external_difficulty": float(d),
            "judge_score": round(min(1.0, max(0.0, d / 10 + rng.uniform(-0.15, 0.15))), 3),
        })
        style = rng.choice(styles)
        for _ in range(args.samples):
            k = max(1, d + rng.choice([-1, 0, 1]))
            traces.append({"example_id": ex_id, "teacher_id": "synthetic-teacher",
                           "raw_text": render(rng, k, style)})

    with open(out / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for r in corpus:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(out / "raw_traces.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for r in traces:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
