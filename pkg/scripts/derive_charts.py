"""Print every Riccati chart of the built-in systems."""

import sys

from prolongation.catalog import BUILTIN_NAMES, load_system
from prolongation.cli import derive_text, derive_chart

names = sys.argv[1:] or BUILTIN_NAMES
for name in names:
    s = load_system(name)
    for p in range(1, s.dim + 1):
        print(derive_text(derive_chart(s, p)))
