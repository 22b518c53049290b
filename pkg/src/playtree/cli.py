"""Operator command line: generate / ingest / build / query / eval / serve."""

from __future__ import annotations

import json
import os
import sys

import click

from playtree.ingest import (PlayStore, TrackingFormatError, extract_windows,
                             parse_tracking)
from playtree.metrics import (alignment_variants, average_precision,
                              compressibility_report, expected_reciprocal_rank,
                              read_judgments, team_draft_interleave)
from playtree.model import Play, agent_tokens, validate_play
from playtree.retrieval import (PlayIndex, Query, UnknownWindowError,
                                baseline_query, build_index, query)
from playtree.synthetic import SyntheticSpec, generate_synthetic, write_labels
from playtree.tree import TreeConfig


def _parse_k_range(text: str) -> tuple:
    try:
        lo, hi = (int(p) for p in text.split(","))
    except ValueError:
        raise click.BadParameter("expected K_MIN,K_MAX, e.g. 2,10")
    return (lo, hi)


def _tree_config(seed, max_leaf_size, max_depth, k_range, metric) -> TreeConfig:
    return TreeConfig(rng_seed=seed, max_leaf_size=max_leaf_size,
                      max_depth=max_depth, k_range=_parse_k_range(k_range),
                      cost_metric=metric)


@click.group()
def main():
    """Formation-tree play alignment and retrieval toolkit."""


@main.command()
@click.option("--formations", type=int, default=4, show_default=True)
@click.option("--plays-per-formation", type=int, default=100, show_default=True)
@click.option("--noise-ft", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--window-seconds", type=int, default=4, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Play store directory to create.")
def generate(formations, plays_per_formation, noise_ft, seed, window_seconds,
             out_dir):
    """Generate a labeled synthetic corpus into a play store."""
    spec = SyntheticSpec(formations=formations,
                         plays_per_formation=plays_per_formation,
                         noise_ft=noise_ft, seed=seed,
                         window_seconds=window_seconds)
    plays, labels = generate_synthetic(spec)
    store = PlayStore(out_dir, create=True)
    store.extend(plays)
    write_labels(os.path.join(out_dir, "labels.csv"), labels)
    click.echo(f"wrote {len(plays)} plays to {out_dir} "
               f"({formations} formations, labels.csv sidecar)")


@main.command()
@click.argument("tracking_files", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--window-seconds", "windows", type=int, multiple=True,
              default=(4,), show_default=True)
@click.option("--stride", type=float, default=1.0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Play store directory to create or extend.")
def ingest(tracking_files, windows, stride, out_dir):
    """Parse tracking files and extract fixed-length play windows."""
    store = PlayStore(out_dir, create=True)
    total = 0
    for path in tracking_files:
        try:
            stream = parse_tracking(path)
            plays = extract_windows(stream, lengths=windows, stride=stride)
        except TrackingFormatError as exc:
            raise click.ClickException(f"{path}: {exc}")
        for p in plays:
            problems = validate_play(p)
            if problems:
                raise click.ClickException(
                    f"{path}: window {p.play_id} invalid: {'; '.join(problems)}")
        store.extend(plays)
        total += len(plays)
        click.echo(f"{path}: {len(plays)} windows")
    click.echo(f"stored {total} plays in {out_dir}")


@main.command()
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-leaf-size", type=int, default=2000, show_default=True)
@click.option("--max-depth", type=int, default=6, show_default=True)
@click.option("--k-range", default="2,10", show_default=True)
@click.option("--metric", type=click.Choice(["euclidean", "squared"]),
              default="squared", show_default=True)
@click.option("--baseline/--no-baseline", default=True, show_default=True)
def build(store_dir, out_path, seed, max_leaf_size, max_depth, k_range,
          metric, baseline):
    """Build the retrieval index (one tree per window length) from a store."""
    config = _tree_config(seed, max_leaf_size, max_depth, k_range, metric)
    plays = list(PlayStore(store_dir))
    if not plays:
        raise click.ClickException(f"play store {store_dir} is empty")
    index = build_index(plays, config, with_baseline=baseline)
    index.save(out_path)
    for w, tree in sorted(index.trees.items()):
        s = tree.stats()
        click.echo(f"{w}s: depth={s['depth']} leaves={s['leaf_count']} "
                   f"plays={sum(s['leaf_sizes'])}")
    click.echo(f"index written to {out_path}")


@main.command(name="query")
@click.option("--index", "index_path", type=click.Path(exists=True), required=True)
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
@click.option("--play-id", required=True, help="Exemplar play id from the store.")
@click.option("--select", "selected", multiple=True,
              help="Trajectory tokens (o0..o4, d0..d4, ball); default all.")
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--method", type=click.Choice(["tree", "baseline"]),
              default="tree", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write results as JSON instead of stdout text.")
def query_cmd(index_path, store_dir, play_id, selected, k, method, out_path):
    """Rank plays similar to an exemplar, optionally over a trajectory subset."""
    store = PlayStore(store_dir)
    if play_id not in store:
        raise click.ClickException(f"unknown play id {play_id!r}")
    play = store.get(play_id)
    index = PlayIndex.load(index_path, store)
    sel = list(selected) if selected else agent_tokens(play)
    try:
        q = Query(play=play, selected=sel, k=k)
        results = query(index, q) if method == "tree" else baseline_query(index, q)
    except (UnknownWindowError, ValueError) as exc:
        raise click.ClickException(str(exc))
    if out_path:
        payload = [{"rank": r.rank, "play_id": r.play_id, "distance": r.distance}
                   for r in results]
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump({"method": method, "selected": sel, "results": payload},
                      fh, indent=1, sort_keys=True)
        click.echo(f"wrote {len(results)} results to {out_path}")
    else:
        for r in results:
            click.echo(f"{r.rank:3d}  {r.play_id}  {r.distance:.4f}")


@main.command(name="eval")
@click.option("--store", "store_dir", type=click.Path(exists=True),
              help="Play store (required for --compressibility).")
@click.option("--compressibility", is_flag=True,
              help="K-means WCE and PCA curves per alignment variant.")
@click.option("--ks", default="5,10,20", show_default=True,
              help="Comma-separated cluster counts for --compressibility.")
@click.option("--metrics", "metrics_mode", is_flag=True,
              help="AP/ERR of rankings against a judgments file.")
@click.option("--rankings", type=click.Path(exists=True),
              help="JSON {query_id: [play_id, ...]} for --metrics/--interleave.")
@click.option("--judgments", type=click.Path(exists=True),
              help="CSV query_id,play_id,relevant for --metrics.")
@click.option("--interleave", "interleave_with", type=click.Path(exists=True),
              help="Second rankings JSON; team-draft interleave with --rankings.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-leaf-size", type=int, default=2000, show_default=True)
@click.option("--max-depth", type=int, default=6, show_default=True)
@click.option("--k-range", default="2,10", show_default=True)
@click.option("--metric", type=click.Choice(["euclidean", "squared"]),
              default="squared", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Report output path (.csv or .json for --compressibility).")
def eval_cmd(store_dir, compressibility, ks, metrics_mode, rankings, judgments,
             interleave_with, seed, max_leaf_size, max_depth, k_range, metric,
             out_path):
    """Evaluate alignment compressibility and retrieval quality."""
    if not (compressibility or metrics_mode or interleave_with):
        raise click.ClickException(
            "choose at least one of --compressibility, --metrics, --interleave")

    if compressibility:
        if not store_dir:
            raise click.ClickException("--compressibility requires --store")
        plays = list(PlayStore(store_dir))
        config = _tree_config(seed, max_leaf_size, max_depth, k_range, metric)
        variants = alignment_variants(plays, config)
        k_list = [int(p) for p in ks.split(",")]
        report = compressibility_report(variants, k_list, seed)
        for name in ("identity", "role", "tree"):
            row = "  ".join(f"K={k}: {report.wce_by_k[name][k]:.3f}"
                            for k in k_list)
            click.echo(f"{name:9s} {row}")
        if out_path:
            if out_path.endswith(".json"):
                report.write_json(out_path)
            else:
                report.write_csv(out_path)
            click.echo(f"report written to {out_path}")

    if metrics_mode:
        if not (rankings and judgments):
            raise click.ClickException("--metrics requires --rankings and --judgments")
        with open(rankings, encoding="utf-8") as fh:
            ranked = json.load(fh)
        by_query: dict = {}
        for j in read_judgments(judgments):
            by_query.setdefault(j.query_id, []).append(j)
        for qid, ranking in sorted(ranked.items()):
            js = by_query.get(qid, [])
            ap = average_precision(ranking, js)
            err = expected_reciprocal_rank(ranking, js)
            click.echo(f"{qid}: AP={ap:.4f} ERR={err:.4f}")

    if interleave_with:
        if not rankings:
            raise click.ClickException("--interleave requires --rankings")
        with open(rankings, encoding="utf-8") as fh:
            ranked_a = json.load(fh)
        with open(interleave_with, encoding="utf-8") as fh:
            ranked_b = json.load(fh)
        for qid in sorted(set(ranked_a) & set(ranked_b)):
            merged = team_draft_interleave(ranked_a[qid], ranked_b[qid], seed)
            shown = " ".join(f"{pid}({src})" for pid, src in merged.items)
            click.echo(f"{qid}: {shown}")


@main.command()
@click.option("--index", "index_path", type=click.Path(exists=True), required=True)
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--default-k", type=int, default=10, show_default=True)
@click.option("--method", type=click.Choice(["tree", "baseline"]),
              default="tree", show_default=True)
def serve(index_path, store_dir, host, port, default_k, method):
    """Run the HTTP query service over a built index."""
    import uvicorn

    from playtree.service import create_app

    app = create_app(index_path=index_path, store_path=store_dir,
                     default_k=default_k, default_method=method)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
