"""Command-line interface; a thin client over the HTTP service.

Without ``--server`` every command runs against an in-process service
instance, so the CLI works standalone while exercising the same wire
schemas a remote deployment uses. File paths in requests are resolved on
the service side (the local machine unless ``--server`` points elsewhere).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from contraqa import __version__
from contraqa.manifest import parse_config_file

ENDPOINT_ENV = "MYTHQA_ENDPOINT"


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from fastapi.testclient import TestClient

    from contraqa.service.app import create_app

    return TestClient(create_app())


def request(client: httpx.Client, method: str, path: str, payload: dict | None = None) -> dict:
    response = client.request(method, path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise SystemExit(f"error: {path} failed ({response.status_code}): {detail}")
    return response.json()


def _config_defaults(args: argparse.Namespace) -> dict:
    values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    if "endpoint" not in values and os.environ.get(ENDPOINT_ENV):
        values["endpoint"] = os.environ[ENDPOINT_ENV]
    return values


def _setting(args: argparse.Namespace, defaults: dict, name: str, fallback=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return defaults.get(name, fallback)


def _load_workspace(client: httpx.Client, args: argparse.Namespace, build_index: bool = True) -> None:
    corpus_dir = getattr(args, "corpus_dir", None)
    corpus = getattr(args, "corpus", None)
    if not corpus_dir and not corpus:
        if getattr(args, "server", None):
            return  # assume the remote service was loaded at startup
        raise SystemExit("error: --corpus-dir or --corpus is required without --server")
    request(
        client,
        "POST",
        "/workspace/load",
        {
            "corpus_dir": corpus_dir,
            "corpus": corpus,
            "index_dir": getattr(args, "index_dir", None),
            "dataset": getattr(args, "dataset", None),
            "build_index": build_index,
        },
    )


def _pipeline_payload(args: argparse.Namespace, defaults: dict) -> dict:
    return {
        "k": _setting(args, defaults, "k", 100),
        "m": _setting(args, defaults, "m", 5),
        "e": _setting(args, defaults, "e", 10),
        "retrieval_weight": _setting(args, defaults, "retrieval_weight", 0.5),
        "mode": _setting(args, defaults, "mode", "extrinsic"),
        "retriever": _setting(args, defaults, "retriever", "bm25"),
        "endpoint": _setting(args, defaults, "endpoint"),
        "claim_as_premise": bool(getattr(args, "claim_as_premise", False)),
        "fixtures": _setting(args, defaults, "fixtures"),
        "gold_oracle": bool(getattr(args, "gold_oracle", False)),
    }


def cmd_ingest(args: argparse.Namespace) -> int:
    with make_client(args.server) as client:
        body = request(client, "POST", "/workspace/ingest", {"corpus": args.corpus, "out": args.out})
    print(
        f"ingested {body['kept']} tweets from {body['lines']} lines "
        f"(retweets dropped: {body['retweets_dropped']}, duplicates dropped: "
        f"{body['duplicates_dropped']}, empty dropped: {body['empty_dropped']})",
        file=sys.stderr,
    )
    print(json.dumps(body))
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    defaults = _config_defaults(args)
    endpoint = _setting(args, defaults, "endpoint")
    if args.dense and not endpoint and not args.hashing_dim:
        raise SystemExit("error: --dense requires --endpoint (or --hashing-dim)")
    payload = {
        "corpus_dir": args.corpus_dir,
        "corpus": args.corpus,
        "out": args.out,
        "dense": args.dense,
        "endpoint": endpoint,
        "hashing_dim": args.hashing_dim,
        "k1": _setting(args, defaults, "k1", 0.9),
        "b": _setting(args, defaults, "b", 0.4),
    }
    with make_client(args.server) as client:
        body = request(client, "POST", "/workspace/index", payload)
    print(
        f"indexed {body['documents']} documents, {body['terms']} terms "
        f"(avg length {body['avg_doc_length']:.2f})",
        file=sys.stderr,
    )
    print(json.dumps(body))
    return 0


def cmd_ask(args: argparse.Namespace) -> int:
    defaults = _config_defaults(args)
    payload = _pipeline_payload(args, defaults)
    payload.update({"question": args.question, "qtype": args.qtype, "question_id": args.question_id})
    with make_client(args.server) as client:
        _load_workspace(client, args)
        body = request(client, "POST", "/ask", payload)
    manifest = body.pop("manifest", None)
    if manifest:
        print(json.dumps({"manifest": manifest}), file=sys.stderr)
    print(json.dumps(body, ensure_ascii=False))
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    defaults = _config_defaults(args)
    payload = _pipeline_payload(args, defaults)
    payload.update(
        {
            "predictions_out": args.predictions_out,
            "retrieval_out": args.retrieval_out,
            "retrieval_k": args.retrieval_k,
            "stance_out": args.stance_out,
            "limit": args.limit,
            "qtype": args.qtype,
            "workers": args.workers,
        }
    )
    with make_client(args.server) as client:
        _load_workspace(client, args)
        body = request(client, "POST", "/run", payload)
    print(json.dumps(body))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    payload = {
        "dataset": args.dataset,
        "predictions": args.predictions,
        "retrieval": args.retrieval,
        "stance": args.stance,
        "e": [int(v) for v in args.e.split(",")] if args.e else [1, 10, 100],
        "k": [int(v) for v in args.k.split(",")] if args.k else [100, 1000],
    }
    with make_client(args.server) as client:
        _load_workspace(client, args, build_index=False)
        body = request(client, "POST", "/eval", payload)
    print(body["table"], file=sys.stderr)
    manifest = body.get("manifest")
    if manifest:
        print(json.dumps({"manifest": manifest}), file=sys.stderr)
    print(json.dumps(body["report"], ensure_ascii=False))
    return 0


def cmd_suggest(args: argparse.Namespace) -> int:
    defaults = _config_defaults(args)
    payload = {
        "template": args.template,
        "aliases": [a.strip() for a in args.aliases.split(",") if a.strip()],
        "pool_size": args.pool_size,
        "clusters": args.clusters,
        "per_cluster": args.per_cluster,
        "seed": args.seed,
        "endpoint": _setting(args, defaults, "endpoint"),
        "hashing_dim": args.hashing_dim,
        "out": args.out,
    }
    with make_client(args.server) as client:
        _load_workspace(client, args)
        body = request(client, "POST", "/suggest", payload)
    print(f"{len(body['suggestions'])} suggestions -> {body.get('out') or 'stdout'}", file=sys.stderr)
    if not args.out:
        for suggestion in body["suggestions"]:
            print(json.dumps(suggestion, ensure_ascii=False))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn
    from fastapi.testclient import TestClient

    from contraqa.service.app import create_app

    app = create_app()
    if args.corpus_dir or args.corpus:
        with TestClient(app) as boot:
            body = request(
                boot,
                "POST",
                "/workspace/load",
                {
                    "corpus_dir": args.corpus_dir,
                    "corpus": args.corpus,
                    "index_dir": args.index_dir,
                    "dataset": args.dataset,
                },
            )
        print(f"workspace loaded: {body}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", help="URL of a running service (default: run in-process)")
    parser.add_argument("--config", help="key=value config file; flags override it")


def _add_workspace(parser: argparse.ArgumentParser, with_dataset: bool = False) -> None:
    parser.add_argument("--corpus-dir", help="directory produced by 'ingest'")
    parser.add_argument("--corpus", help="cleaned corpus JSONL (alternative to --corpus-dir)")
    parser.add_argument("--index-dir", help="directory produced by 'index' (built in-memory if omitted)")
    if with_dataset:
        parser.add_argument("--dataset", help="dataset JSON file")


def _add_pipeline(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, help="retrieval depth (default 100)")
    parser.add_argument("--m", type=int, help="answers to predict (default 5)")
    parser.add_argument("--e", type=int, help="evidence per stance (default 10)")
    parser.add_argument(
        "--lambda", dest="retrieval_weight", type=float, help="retrieval-score weight in [0,1]"
    )
    parser.add_argument("--mode", choices=["intrinsic", "extrinsic"], help="candidate pool mode")
    parser.add_argument("--retriever", choices=["bm25", "dense"], help="retriever backend")
    parser.add_argument("--endpoint", help=f"inference sidecar URL (default ${ENDPOINT_ENV})")
    parser.add_argument(
        "--claim-as-premise",
        action="store_true",
        help="flip the NLI orientation (premise=claim instead of premise=tweet)",
    )
    parser.add_argument("--fixtures", help="mock-extractor fixture JSONL")
    parser.add_argument(
        "--gold-oracle", action="store_true", help="use dataset-backed oracle scorer + extractor"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contraqa",
        description="Multi-answer QA over a tweet corpus with contradictory-evidence mining.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean and deduplicate a tweet corpus")
    p.add_argument("--corpus", required=True, help="raw corpus JSONL")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build and persist retrieval indexes")
    p.add_argument("--corpus-dir", help="directory produced by 'ingest'")
    p.add_argument("--corpus", help="cleaned corpus JSONL")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dense", action="store_true", help="also build a dense index")
    p.add_argument("--endpoint", help="embedding sidecar URL for --dense")
    p.add_argument("--hashing-dim", type=int, help="model-free hashing embeddings for --dense")
    p.add_argument("--k1", type=float, help="BM25 k1 (default 0.9)")
    p.add_argument("--b", type=float, help="BM25 b (default 0.4)")
    _add_common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("ask", help="answer one question, prediction JSONL to stdout")
    p.add_argument("--question", required=True)
    p.add_argument("--qtype", required=True, choices=["entity", "yesno"])
    p.add_argument("--question-id", help="dataset question id (enables intrinsic mode)")
    _add_workspace(p, with_dataset=True)
    _add_pipeline(p)
    _add_common(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("run", help="run the pipeline over a dataset, writing dump files")
    _add_workspace(p, with_dataset=True)
    _add_pipeline(p)
    p.add_argument("--predictions-out", help="prediction dump JSONL path")
    p.add_argument("--retrieval-out", help="retrieval dump JSONL path")
    p.add_argument("--retrieval-k", type=int, help="retrieval dump depth (default: --k)")
    p.add_argument("--stance-out", help="stance dump JSONL path (annotated pairs)")
    p.add_argument("--limit", type=int, help="only the first N questions")
    p.add_argument("--qtype", choices=["entity", "yesno"], help="restrict to one question type")
    p.add_argument("--workers", type=int, help="parallel question workers (default: cores)")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score dump files against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", help="prediction dump JSONL")
    p.add_argument("--retrieval", help="retrieval dump JSONL")
    p.add_argument("--stance", help="stance dump JSONL")
    p.add_argument("--e", help="comma-separated evidence depths (default 1,10,100)")
    p.add_argument("--k", help="comma-separated retrieval depths (default 100,1000)")
    p.add_argument("--corpus-dir", help="corpus the dataset references")
    p.add_argument("--corpus", help="cleaned corpus JSONL")
    p.add_argument("--index-dir", help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("suggest", help="suggest controversial tweets for annotation")
    p.add_argument("--template", required=True, help="claim template containing TOPIC_ENTITY")
    p.add_argument("--aliases", required=True, help="comma-separated topic-entity aliases")
    p.add_argument("--out", help="suggestion JSONL path (default: stdout)")
    p.add_argument("--pool-size", type=int, default=1000)
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--per-cluster", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--endpoint", help="embedding sidecar URL")
    p.add_argument("--hashing-dim", type=int, help="model-free hashing embeddings")
    _add_workspace(p)
    _add_common(p)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    _add_workspace(p, with_dataset=True)
    _add_common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
