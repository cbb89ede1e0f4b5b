"""Schema-versioned CSV files.

Every file starts with '# kinhydro-csv <schema> <major>.<minor>', followed by
'# key = value' metadata comments, one column-header line, then data rows.
Floats are serialized with 17 significant digits so files round-trip
bit-exactly.  Readers reject major-version mismatches.
"""

import numpy as np

from .errors import ConfigError

SCHEMA_VERSIONS = {
    "report": (1, 0),
    "series": (1, 0),
    "diag": (1, 0),
    "ledger": (1, 0),
    "transport": (1, 0),
    "relax": (1, 0),
}


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, schema, meta, columns, rows):
    major, minor = SCHEMA_VERSIONS[schema]
    with open(path, "w") as f:
        f.write(f"# kinhydro-csv {schema} {major}.{minor}\n")
        for k, v in meta.items():
            f.write(f"# {k} = {format_value(v)}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(format_value(v) for v in row) + "\n")


def read_csv(path, schema=None):
    """Returns (schema, meta, columns, rows); rows are float ndarrays where
    possible, raw strings otherwise."""
    meta = {}
    columns = None
    rows = []
    name = None
    with open(path) as f:
        first = f.readline().strip()
        parts = first.split()
        if len(parts) != 4 or parts[0] != "#" or parts[1] != "kinhydro-csv":
            raise ConfigError(f"{path}: missing kinhydro-csv schema line")
        name = parts[2]
        major = int(parts[3].split(".")[0])
        if name not in SCHEMA_VERSIONS:
            raise ConfigError(f"{path}: unknown schema '{name}'")
        if schema is not None and name != schema:
            raise ConfigError(f"{path}: expected schema '{schema}', found '{name}'")
        if major != SCHEMA_VERSIONS[name][0]:
            raise ConfigError(
                f"{path}: schema major version {major} incompatible with "
                f"{SCHEMA_VERSIONS[name][0]}"
            )
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if columns is None:
                columns = line.split(",")
                continue
            rows.append(line.split(","))
    coldata = {}
    if columns is not None:
        for ci, cname in enumerate(columns):
            vals = [r[ci] for r in rows]
            try:
                coldata[cname] = np.array([float(x) for x in vals])
            except ValueError:
                coldata[cname] = vals
    return name, meta, columns, coldata
