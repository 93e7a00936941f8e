"""``phsic`` command line: fit, score, rank, select, pmi, eval, hsic.

Exit codes: 0 success, 1 usage or parameter error, 2 data error (parse,
dimension, corrupt model, too little data), 3 numeric / factorization error.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import os
import resource
import sys
import time
import traceback
from collections import defaultdict
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import PairedDataset, embed_dataset, load_embeddings, load_pairs
from .errors import ParameterError, ParseError, PhsicError
from .estimators import ESTIMATORS, fit_model, in_sample_scores, score_arrays, score_pairs
from .evaluation import (
    DEFAULT_CANDIDATES,
    RankingInstance,
    make_negatives,
    mrr_and_recall,
    select_top_k,
)
from .feature import apply_feature_map
from .icd import DEFAULT_RANK
from .kernels import parse_kernel
from .modelio import read_model_file, save_model
from .pmi import SURFACE, TOKEN_SET, fit_pmi, format_pmi, score_pmi_batch

logger = logging.getLogger("phsic")

NAIVE_LIMIT = 50_000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


@contextlib.contextmanager
def _thread_limit():
    value = os.environ.get("PHSIC_THREADS")
    if not value:
        yield
        return
    try:
        limit = int(value)
    except ValueError:
        raise ParameterError(f"PHSIC_THREADS must be an integer, got {value!r}") from None
    if limit < 1:
        raise ParameterError("PHSIC_THREADS must be >= 1")
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=limit):
        yield


def _load_embedded(args, path):
    ds = load_pairs(path, lowercase=args.lowercase)
    ex = args.embeddings_x or args.embeddings
    ey = args.embeddings_y or args.embeddings
    if ex is None or ey is None:
        raise ParameterError("--embeddings (or both --embeddings-x and --embeddings-y) is required")
    table_x = load_embeddings(ex)
    table_y = table_x if ey == ex else load_embeddings(ey)
    ds = embed_dataset(ds, table_x, table_y)
    if ds.zero_vector_count:
        logger.warning("%s: %d pairs embed to a zero vector", path, ds.zero_vector_count)
    return ds


def _normalized(ds: PairedDataset, normalize: bool) -> PairedDataset:
    if not normalize or not ds.embedded:
        return ds
    return replace(
        ds,
        x_vecs=apply_feature_map("length-normalized", ds.x_vecs),
        y_vecs=apply_feature_map("length-normalized", ds.y_vecs),
    )


def _kernels(args):
    kx = parse_kernel(args.kernel_x or args.kernel)
    ky = parse_kernel(args.kernel_y or args.kernel)
    return kx, ky


def _fit_from_args(args, ds):
    kx, ky = _kernels(args)
    if args.estimator == "naive" and ds.n > NAIVE_LIMIT and not args.force:
        raise ParameterError(
            f"naive estimator is O(n^2); n={ds.n} exceeds {NAIVE_LIMIT} (pass --force to run anyway)"
        )
    start = time.perf_counter()
    model = fit_model(ds, kx, ky, args.estimator, args.rank, args.tol)
    elapsed = time.perf_counter() - start
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    logger.info("fit %s on n=%d in %.3f s (peak RSS ~%.0f MiB)", args.estimator, ds.n, elapsed, peak)
    return model


def _load_model(args):
    mf = read_model_file(args.model)
    return mf.model, mf.normalize


def cmd_fit(args):
    ds = _normalized(_load_embedded(args, args.pairs), args.normalize)
    model = _fit_from_args(args, ds)
    save_model(model, args.output, normalize=args.normalize)
    return 0


def cmd_score(args):
    model, normalize = _load_model(args)
    ds = load_pairs(args.pairs, lowercase=args.lowercase)
    with _output(args.output) as out:
        if ds.n == 0:
            return 0
        ds = _normalized(_load_embedded(args, args.pairs), normalize)
        scores = score_pairs(model, ds)
        for line, s in zip(ds.line_numbers, scores):
            out.write(f"{line}\t{_fmt(s)}\n")
    return 0


def rank_instances(model, ds: PairedDataset, m: int, seed: int):
    """Score every candidate of seeded m-choice questions built from ``ds``."""
    instances = make_negatives(ds, m, seed)
    ctx = np.repeat([inst.context for inst in instances], m)
    cand = np.concatenate([inst.candidates for inst in instances])
    X, Y = ds.vectors()
    flat = score_arrays(model, X[ctx], Y[cand])
    return instances, flat.reshape(len(instances), m)


def cmd_rank(args):
    model, normalize = _load_model(args)
    ds = _normalized(_load_embedded(args, args.pairs), normalize)
    instances, scores = rank_instances(model, ds, args.candidates, args.seed)
    report = mrr_and_recall(instances, list(scores), args.ks)
    with _output(args.output) as out:
        out.write(report.to_text())
        out.write(report.to_kv())
    return 0


def _keep_count(text: str, n: int) -> int:
    try:
        if text.endswith("%"):
            k = int(math.floor(float(text[:-1]) / 100.0 * n + 1e-9))
        else:
            k = int(text)
    except ValueError:
        raise ParameterError(f"--keep must be an integer or a percentage, got {text!r}") from None
    if not 1 <= k <= n:
        raise ParameterError(f"--keep resolves to {k} pairs but the corpus has {n}")
    return k


def cmd_select(args):
    model, normalize = _load_model(args)
    ds = _normalized(_load_embedded(args, args.pairs), normalize)
    if ds.n == 0:
        raise ParameterError("cannot select from an empty corpus")
    k = _keep_count(args.keep, ds.n)
    scores = score_pairs(model, ds)
    result = select_top_k(scores, k)
    with _output(args.output) as out:
        for i in result.selected:
            out.write(f"{ds.x_texts[i]}\t{ds.y_texts[i]}\n")
    if args.audit:
        kept = result.kept_mask()
        with open(args.audit, "w", encoding="utf-8", newline="\n") as fh:
            for i in range(ds.n):
                fh.write(f"{i}\t{_fmt(scores[i])}\t{int(kept[i])}\n")
    return 0


def cmd_pmi(args):
    train = load_pairs(args.pairs, lowercase=args.lowercase)
    model = fit_pmi(train, args.key_mode, args.smoothing)
    test = load_pairs(args.score_pairs, lowercase=args.lowercase)
    scores = score_pmi_batch(model, test)
    with _output(args.output) as out:
        for line, s in zip(test.line_numbers, scores):
            if args.clamp and not math.isnan(s):
                s = max(s, 0.0)
            out.write(f"{line}\t{format_pmi(s)}\n")
    return 0


def _parse_score(text, path, lineno):
    if text == "undef":
        return math.nan
    if text == "-inf":
        return -math.inf
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"bad score {text!r}", path, lineno) from None


def read_scores_tsv(path):
    """Group a ``instance-id, candidate-id, score, is-gold`` TSV into ranking instances."""
    groups = defaultdict(list)
    order = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ParseError(f"expected 4 tab-separated columns, got {len(cols)}", path, lineno)
            inst, cand, score, gold = cols
            if gold not in ("0", "1"):
                raise ParseError(f"is-gold must be 0 or 1, got {gold!r}", path, lineno)
            try:
                cand_id = int(cand)
            except ValueError:
                raise ParseError(f"candidate-id must be an integer, got {cand!r}", path, lineno) from None
            if inst not in groups:
                order.append(inst)
            groups[inst].append((cand_id, _parse_score(score, path, lineno), gold == "1"))
    instances, scores = [], []
    for idx, inst in enumerate(order):
        rows = groups[inst]
        golds = [j for j, r in enumerate(rows) if r[2]]
        if len(golds) != 1:
            raise ParseError(f"instance {inst!r} has {len(golds)} gold candidates, expected 1", path)
        cands = tuple(r[0] for r in rows)
        if len(set(cands)) != len(cands):
            raise ParseError(f"instance {inst!r} repeats a candidate id", path)
        instances.append(RankingInstance(idx, cands, golds[0]))
        scores.append([r[1] for r in rows])
    return instances, scores


def cmd_eval(args):
    instances, scores = read_scores_tsv(args.scores)
    report = mrr_and_recall(instances, scores, args.ks)
    with _output(args.output) as out:
        out.write(report.to_text())
        out.write(report.to_kv())
    return 0


def cmd_hsic(args):
    ds = _normalized(_load_embedded(args, args.pairs), args.normalize)
    model = _fit_from_args(args, ds)
    scores = in_sample_scores(model, ds)
    print(_fmt(math.fsum(scores) / len(scores)))
    return 0


def _ks(text):
    try:
        ks = sorted({int(k) for k in text.split(",") if k.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or ks[0] < 1:
        raise argparse.ArgumentTypeError("recall cut-offs must be positive integers")
    return ks


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="phsic", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="repeat for more log output")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def text_input(p):
        p.add_argument("--pairs", required=True, help="TAB-separated pair file")
        p.add_argument("--lowercase", action="store_true", help="lowercase text before tokenizing")

    def embeddings(p):
        p.add_argument("--embeddings", help="word-embedding text file used for both sides")
        p.add_argument("--embeddings-x", help="embedding file for the x side (overrides --embeddings)")
        p.add_argument("--embeddings-y", help="embedding file for the y side (overrides --embeddings)")

    def estimator(p):
        p.add_argument("--kernel", default="cos",
                       help="cos | linear | rbf:SIGMA | laplacian:GAMMA | poly:DEGREE:OFFSET | sum(K,K) | prod(K,K)")
        p.add_argument("--kernel-x", help="kernel for the x side (overrides --kernel)")
        p.add_argument("--kernel-y", help="kernel for the y side (overrides --kernel)")
        p.add_argument("--estimator", choices=ESTIMATORS, default="feature")
        p.add_argument("--rank", type=int, default=DEFAULT_RANK, help="incomplete Cholesky rank d")
        p.add_argument("--tol", type=float, default=None,
                       help="incomplete Cholesky residual-trace stop (default 1e-9 * initial trace)")
        p.add_argument("--normalize", action="store_true",
                       help="length-normalize sentence vectors before applying the kernel")
        p.add_argument("--force", action="store_true",
                       help=f"allow the naive estimator above n={NAIVE_LIMIT}")

    p = sub.add_parser("fit", help="fit a PHSIC model", formatter_class=fmt)
    text_input(p)
    embeddings(p)
    estimator(p)
    p.add_argument("--output", "-o", required=True, help="model file to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score pairs with a fitted model", formatter_class=fmt)
    text_input(p)
    embeddings(p)
    p.add_argument("--model", required=True)
    p.add_argument("--output", "-o", default=None, help="scores TSV (default stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="m-choice response ranking with shuffled negatives", formatter_class=fmt)
    text_input(p)
    embeddings(p)
    p.add_argument("--model", required=True)
    p.add_argument("--candidates", "-m", type=int, default=DEFAULT_CANDIDATES, help="choices per question")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ks", type=_ks, default=[1, 2], help="Recall@k cut-offs, comma-separated")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("select", help="keep the top-K pairs of a corpus by PHSIC", formatter_class=fmt)
    text_input(p)
    embeddings(p)
    p.add_argument("--model", required=True)
    p.add_argument("--keep", required=True, help="pairs to keep: a count or a percentage such as 90%%")
    p.add_argument("--output", "-o", default=None, help="selected pairs TSV (default stdout)")
    p.add_argument("--audit", default=None, help="audit TSV: index, score, kept flag")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("pmi", help="counting PMI baseline", formatter_class=fmt)
    text_input(p)
    p.add_argument("--score-pairs", required=True, help="pairs to score")
    p.add_argument("--key-mode", choices=(SURFACE, TOKEN_SET), default=SURFACE)
    p.add_argument("--smoothing", type=float, default=0.0, help="add-k smoothing (0 = maximum likelihood)")
    p.add_argument("--clamp", action="store_true", help="clamp finite and -inf scores at 0 (positive PMI)")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_pmi)

    p = sub.add_parser("eval", help="ranking metrics from a scores TSV", formatter_class=fmt)
    p.add_argument("--scores", required=True, help="TSV: instance-id, candidate-id, score, is-gold")
    p.add_argument("--ks", type=_ks, default=[1, 2], help="Recall@k cut-offs, comma-separated")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("hsic", help="print the empirical HSIC of a corpus", formatter_class=fmt)
    text_input(p)
    embeddings(p)
    estimator(p)
    p.set_defaults(func=cmd_hsic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return args.func(args)
    except PhsicError as exc:
        origin = Path(traceback.extract_tb(exc.__traceback__)[-1].filename).stem
        print(f"phsic {args.command}: [{origin}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"phsic {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
