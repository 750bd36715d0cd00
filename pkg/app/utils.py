import logging
import sys
from pathlib import Path
from typing import Any

import orjson
from pydantic import BaseModel

from app.core.config import settings
from app.models import Image, PullbackTree, Report

logger = logging.getLogger(__name__)


def to_jsonable(value: BaseModel | dict[str, Any] | list[Any]) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    return value


def dump_json(data: Any) -> bytes:
    return orjson.dumps(to_jsonable(data), option=orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE)


def encode_pgm(image: Image) -> bytes:
    """Binary PGM: P5 header with ASCII width, height and maxval, then raw rows from the top."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.pixels.astype("uint8", copy=False).tobytes(order="C")


def decode_pgm(data: bytes) -> tuple[int, int, bytes]:
    magic, dims, maxval, raw = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit binary PGM")
    width, height = (int(x) for x in dims.split())
    if len(raw) != width * height:
        raise ValueError(f"PGM body has {len(raw)} bytes, expected {width * height}")
    return width, height, raw


def encode_graph(tree: PullbackTree, name: str | None = None) -> bytes:
    return tree.to_graph_file(name).encode("utf-8")


def write_output(data: bytes, out: Path | None = None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    logger.info(f"wrote {len(data)} bytes to {out}")


def build_report(
    command: list[str], payload: BaseModel | dict[str, Any], threads: int, timing: float | None = None
) -> Report:
    return Report(
        schema_version=settings.SCHEMA_VERSION,
        project=settings.PROJECT_NAME,
        command=command,
        threads=threads,
        payload=to_jsonable(payload),
        timing=timing,
    )
