"""Dataset registries backed by plain-text manifests.

Manifest grammar (one file per dataset, UTF-8)::

    # key: value                     header metadata (see below)
    # free text                      comment
    <relative-path>\\t<class-label>\\t<channel-selector>[\\t<sha256>]

Header keys: ``dataset``, ``subdir`` (directory under the data root),
``sampling_rate_hz``, ``rate_override`` (``<path>=<hz>``, repeatable),
``condition_pattern`` (regex with named groups applied to the path) and
``default_condition`` (``key=value`` filter applied when the caller gives
none).

Class ids follow the order in which labels first appear in the manifest.

Channel selectors
-----------------
CSV / text files: ``col=K`` picks the zero-based column K.

MAT files: a dotted path of segments. Each segment is a variable or field
name (``*`` globs and the ``{stem}`` placeholder allowed on the first
segment) optionally followed by one bracket filter: ``[Field=value]``
selects the element of a struct array whose ``Field`` equals ``value``;
``[col=K]`` / ``[row=K]`` select one column / row of a numeric matrix.
"""

from __future__ import annotations

import fnmatch
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import PurePosixPath

import numpy as np

from ..errors import DataError, ManifestError, RegistryError

MANIFEST_PACKAGE = "faultbench.datasets.manifests"
DATA_ROOT_ENV = "FAULTBENCH_DATA_ROOT"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    selector: str
    checksum: str | None = None


@dataclass(frozen=True)
class DatasetRegistry:
    dataset_id: str
    entries: tuple
    classes: tuple                     # labels in id order
    sampling_rate_hz: float
    subdir: str
    rate_overrides: dict = field(default_factory=dict)
    condition_pattern: str | None = None
    default_condition: dict = field(default_factory=dict)

    @property
    def class_count(self):
        return len(self.classes)

    @property
    def class_table(self):
        return {label: i for i, label in enumerate(self.classes)}

    def class_id(self, label):
        try:
            return self.classes.index(label)
        except ValueError:
            raise RegistryError(f"{self.dataset_id}: unknown class label {label!r}") from None

    def rate_for(self, path):
        return self.rate_overrides.get(path, self.sampling_rate_hz)

    def condition_for(self, entry):
        cond = {"label": entry.label}
        if self.condition_pattern:
            m = re.search(self.condition_pattern, entry.path)
            if m:
                cond.update({k: v for k, v in m.groupdict().items() if v is not None})
        return cond

    def select(self, condition=None, labels=None):
        """Entries matching a ``{key: value}`` condition filter and label subset."""
        condition = self.default_condition if condition is None else condition
        out = []
        for e in self.entries:
            cond = self.condition_for(e)
            if any(cond.get(k) != v for k, v in condition.items()):
                continue
            if labels is not None and e.label not in labels:
                continue
            out.append(e)
        return out


def parse_manifest(text, dataset_id=None):
    meta = {"rate_override": []}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*([a-z_]+)\s*:\s*(.*)$", line)
            if m:
                key, value = m.group(1), m.group(2).strip()
                if key == "rate_override":
                    meta[key].append(value)
                else:
                    meta[key] = value
            continue
        cols = line.split("\t")
        if len(cols) not in (3, 4) or not all(c.strip() for c in cols[:3]):
            raise RegistryError(f"manifest line {lineno}: expected path<TAB>label<TAB>selector")
        entries.append(ManifestEntry(cols[0], cols[1], cols[2], cols[3] if len(cols) == 4 else None))

    dataset_id = meta.get("dataset", dataset_id)
    if not dataset_id:
        raise RegistryError("manifest does not name its dataset")
    if "sampling_rate_hz" not in meta:
        raise RegistryError(f"{dataset_id}: manifest lacks a sampling_rate_hz header")
    classes = tuple(dict.fromkeys(e.label for e in entries))
    overrides = {}
    for item in meta["rate_override"]:
        path, _, hz = item.rpartition("=")
        overrides[path.strip()] = float(hz)
    default_condition = {}
    if meta.get("default_condition"):
        for pair in meta["default_condition"].split(","):
            k, _, v = pair.partition("=")
            default_condition[k.strip()] = v.strip()
    return DatasetRegistry(
        dataset_id=dataset_id,
        entries=tuple(entries),
        classes=classes,
        sampling_rate_hz=float(meta["sampling_rate_hz"]),
        subdir=meta.get("subdir", dataset_id),
        rate_overrides=overrides,
        condition_pattern=meta.get("condition_pattern"),
        default_condition=default_condition,
    )


def available_datasets():
    files = resources.files(MANIFEST_PACKAGE).iterdir()
    return sorted(f.name[: -len(".tsv")] for f in files if f.name.endswith(".tsv"))


_CACHE = {}


def get_registry(dataset_id):
    if dataset_id not in _CACHE:
        if dataset_id not in available_datasets():
            raise RegistryError(
                f"unknown dataset {dataset_id!r}; known: {', '.join(available_datasets())}"
            )
        text = resources.files(MANIFEST_PACKAGE).joinpath(f"{dataset_id}.tsv").read_text("utf-8")
        _CACHE[dataset_id] = parse_manifest(text, dataset_id)
    return _CACHE[dataset_id]


# -- channel selection --------------------------------------------------------

_SEGMENT = re.compile(r"^(?P<name>[^\[\]]+)(?:\[(?P<key>[^=\]]+)=(?P<value>[^\]]*)\])?$")


def _split_path(selector):
    # dots inside brackets belong to the filter value
    parts, depth, cur = [], 0, ""
    for ch in selector:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "." and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def _matrix_pick(arr, key, value, where):
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise DataError(f"{where}: [{key}=...] needs a 2-D matrix, got shape {arr.shape}")
    k = int(value)
    axis = 1 if key == "col" else 0
    if not 0 <= k < arr.shape[axis]:
        raise DataError(f"{where}: {key} {k} out of range for shape {arr.shape}")
    return arr[:, k] if axis == 1 else arr[k, :]


def select_mat(variables, selector, path):
    """Resolve a MAT-file selector to ``(channel_name, 1-D float array)``."""
    stem = PurePosixPath(path).stem
    segments = _split_path(selector.replace("{stem}", stem))
    current = variables
    resolved = []
    for i, seg in enumerate(segments):
        m = _SEGMENT.match(seg)
        if not m:
            raise RegistryError(f"bad selector segment {seg!r} in {selector!r}")
        name, key, value = m.group("name"), m.group("key"), m.group("value")
        if not isinstance(current, dict):
            raise DataError(f"{path}: cannot take field {name!r} of a non-struct value")
        if i == 0 and any(c in name for c in "*?["):
            hits = sorted(fnmatch.filter(current.keys(), name))
            if len(hits) != 1:
                raise DataError(f"{path}: selector {name!r} matches {hits or 'nothing'}")
            name = hits[0]
        if name not in current:
            raise DataError(f"{path}: no variable or field {name!r} (have {sorted(current)})")
        current = current[name]
        resolved.append(name)
        if key is None:
            continue
        if key in ("col", "row"):
            current = _matrix_pick(current, key, value, path)
        else:
            items = current if isinstance(current, list) else [current]
            hits = [it for it in items if isinstance(it, dict) and str(it.get(key)) == value]
            if len(hits) != 1:
                raise DataError(f"{path}: {len(hits)} struct elements with {key}={value!r}")
            current = hits[0]
        resolved[-1] += f"[{key}={value}]"
    arr = np.asarray(current)
    if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
        raise DataError(f"{path}: selector {selector!r} does not point at numeric data")
    return ".".join(resolved), arr.astype(np.float64).ravel(order="F")


def select_table(table, selector, path):
    m = re.fullmatch(r"col=(\d+)", selector.strip())
    if not m:
        raise RegistryError(f"text files take a 'col=K' selector, got {selector!r}")
    k = int(m.group(1))
    if k >= table.shape[1]:
        raise DataError(f"{path}: column {k} requested but the table has {table.shape[1]}")
    return f"col{k}", table[:, k].astype(np.float64)
