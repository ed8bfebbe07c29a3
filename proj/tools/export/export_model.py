#!/usr/bin/env python3
# Copyright 2026 The modguard Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Export a CLIP-style checkpoint for `modguard embed --backend model`.

Only the interface lives here: the manifest type, the sidecar layout that
ModelBackend reads, and the command line. The conversion itself needs the
upstream weights and an OpenCV DNN build that can import attention (4.8 or
later), neither of which is assumed by the C++ build.

    export_model.py --checkpoint openai/clip-vit-large-patch14 --out models/clip
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import pathlib
import sys

FORMAT_VERSION = 1
SELF_CHECK_MIN_COSINE = 0.999
PROBE_TEXT = "a photo of a dog"

# Published CLIP preprocessing constants.
CLIP_MEAN = (0.48145466, 0.4578275, 0.40821073)
CLIP_STD = (0.26862954, 0.26130258, 0.27577711)


class ExportError(Exception):
    pass


class DownloadFailure(ExportError):
    pass


class ExportMismatch(ExportError):
    def __init__(self, modality: str, cosine: float):
        super().__init__(f"{modality} self-check cosine {cosine:.6f} < {SELF_CHECK_MIN_COSINE}")
        self.modality = modality
        self.cosine = cosine


@dataclasses.dataclass
class Preprocessing:
    resize_shorter: int = 224
    crop: int = 224
    mean: tuple[float, float, float] = CLIP_MEAN
    std: tuple[float, float, float] = CLIP_STD


@dataclasses.dataclass
class ExportManifest:
    checkpoint_name: str
    dim: int
    text_width: int
    vocab_size: int
    context_length: int = 77
    preprocessing: Preprocessing = dataclasses.field(default_factory=Preprocessing)
    tool_versions: dict[str, str] = dataclasses.field(default_factory=dict)
    file_hashes: dict[str, str] = dataclasses.field(default_factory=dict)

    def to_sidecar(self) -> dict:
        p = self.preprocessing
        return {
            "format_version": FORMAT_VERSION,
            "checkpoint": self.checkpoint_name,
            "dim": self.dim,
            "text": {
                "graph": "text.onnx",
                "token_embedding": "tokens.f32",
                "vocab_size": self.vocab_size,
                "width": self.text_width,
                "context_length": self.context_length,
                "vocab": "vocab.json",
                "merges": "merges.txt",
                "bos_token": "<|startoftext|>",
                "eos_token": "<|endoftext|>",
                "pad_id": 0,
                "embeddings_input": "token_embeddings",
                "output": "token_features",
            },
            "image": {
                "graph": "image.onnx",
                "input": "pixel_values",
                "output": "image_embeds",
                "resize_shorter": p.resize_shorter,
                "crop": p.crop,
                "mean": list(p.mean),
                "std": list(p.std),
            },
            "tool_versions": dict(sorted(self.tool_versions.items())),
            "files": dict(sorted(self.file_hashes.items())),
        }

    def verify_hashes(self, out_dir: pathlib.Path) -> list[str]:
        """Names of files whose current hash differs from the manifest."""
        return [name for name, digest in self.file_hashes.items() if sha256_file(out_dir / name) != digest]


def sha256_file(path: pathlib.Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_sidecar(manifest: ExportManifest, out_dir: pathlib.Path) -> pathlib.Path:
    path = out_dir / "sidecar.json"
    path.write_text(json.dumps(manifest.to_sidecar(), indent=2) + "\n", encoding="utf-8")
    return path


def export(checkpoint_name: str, out_dir: pathlib.Path) -> ExportManifest:
    """Emit text.onnx, image.onnx, tokens.f32, the tokenizer files and sidecar.json.

    Raises DownloadFailure when the checkpoint cannot be fetched and
    ExportMismatch when the probe text or probe image embeds differently
    through the exported files than through the native model.
    """
    raise NotImplementedError(
        f"exporting {checkpoint_name!r} needs the upstream weights; see tests/fixtures/model/make_fixtures.py "
        "for the graph contract (host-side token lookup, per-position text features, fp32)"
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--out", required=True, type=pathlib.Path)
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        manifest = export(args.checkpoint, args.out)
    except ExportError as e:
        print(f"export_model: {e}", file=sys.stderr)
        return 1
    except NotImplementedError as e:
        print(f"export_model: {e}", file=sys.stderr)
        return 2
    print(write_sidecar(manifest, args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
