"""Startup flags: backend choice, model identifiers, batching, port."""

from __future__ import annotations

import argparse

from modelserver.backends import (
    DEFAULT_EMBED_MODEL,
    DEFAULT_NLI_MODEL,
    DEFAULT_READER_MODEL,
    StubBackend,
    TransformersBackend,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelserver", description=__doc__)
    parser.add_argument(
        "--backend",
        choices=["stub", "transformers"],
        default="stub",
        help="stub: deterministic model-free backend; transformers: frozen pretrained models",
    )
    parser.add_argument("--nli-model", default=DEFAULT_NLI_MODEL)
    parser.add_argument("--embed-model", default=DEFAULT_EMBED_MODEL)
    parser.add_argument("--reader-model", default=DEFAULT_READER_MODEL)
    parser.add_argument("--dim", type=int, default=32, help="stub embedding dimension")
    parser.add_argument("--max-batch-size", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=9000)
    return parser


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    from modelserver.app import create_app

    args = build_parser().parse_args(argv)
    if args.backend == "stub":
        backend = StubBackend(dim=args.dim, max_batch_size=args.max_batch_size)
    else:
        backend = TransformersBackend(
            nli_model=args.nli_model,
            embed_model=args.embed_model,
            reader_model=args.reader_model,
            max_batch_size=args.max_batch_size,
            device=args.device,
        )
    uvicorn.run(create_app(backend), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
