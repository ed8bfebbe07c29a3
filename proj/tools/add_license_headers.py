#!/usr/bin/env python3
"""Prepend the Apache-2.0 notice to source, CMake and Python files.

Idempotent: files that already carry the copyright line are left alone.
Data files (prompts, fixtures, JSON) are never touched.
"""

import pathlib
import sys

COPYRIGHT = "Copyright 2026 The modguard Authors. All Rights Reserved."
BODY = """Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License."""

ROOTS = ["CMakeLists.txt", "cmake", "core", "tools", "tests", "benchmarks"]
C_SUFFIXES = {".cpp", ".hpp", ".h", ".cc"}


def c_header():
    return f"/* {COPYRIGHT}\n\n{BODY}\n{'=' * 78}*/\n\n"


def hash_header():
    lines = [COPYRIGHT, ""] + BODY.splitlines()
    return "".join(f"# {l}".rstrip() + "\n" for l in lines) + "\n"


def is_hash_style(path):
    return path.name == "CMakeLists.txt" or path.suffix == ".py" or path.name.endswith((".cmake", ".cmake.in"))


def candidates(root):
    for entry in ROOTS:
        p = root / entry
        files = [p] if p.is_file() else sorted(x for x in p.rglob("*") if x.is_file())
        for f in files:
            if f.suffix in C_SUFFIXES or is_hash_style(f):
                yield f


def apply(path):
    text = path.read_text(encoding="utf-8")
    if COPYRIGHT in text:
        return False
    header = c_header() if path.suffix in C_SUFFIXES else hash_header()
    if text.startswith("#!"):
        shebang, _, rest = text.partition("\n")
        text = f"{shebang}\n{header}{rest}"
    else:
        text = header + text
    path.write_text(text, encoding="utf-8")
    return True


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parents[1])
    changed = [p for p in candidates(root) if apply(p)]
    for p in changed:
        print(p.relative_to(root))
    return 0


if __name__ == "__main__":
    sys.exit(main())
