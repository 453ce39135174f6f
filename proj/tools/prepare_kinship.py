#!/usr/bin/env python3
# Copyright 2026 The kgad Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Extract the Kinships triples (train+valid+test) from a PyKEEN wheel.

Usage: prepare_kinship.py pykeen-*.whl data/kinship.tsv

Obtain the wheel with `pip download pykeen --no-deps -d /tmp/pk`.
"""

import sys
import zipfile


def main(argv):
    if len(argv) != 3:
        sys.exit(__doc__)
    wheel, out = argv[1], argv[2]
    lines = []
    with zipfile.ZipFile(wheel) as z:
        for split in ("train", "valid", "test"):
            text = z.read(f"pykeen/datasets/kinships/{split}.txt").decode()
            lines.extend(l for l in text.splitlines() if l.strip())
    with open(out, "w", encoding="utf-8") as f:
        f.write("# Kinships (Kemp et al. 2006) as bundled with PyKEEN; train+valid+test\n")
        for l in lines:
            f.write(l + "\n")
    print(f"wrote {len(lines)} triples to {out}")


if __name__ == "__main__":
    main(sys.argv)
