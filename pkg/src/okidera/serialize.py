"""File formats: dataset CSV + manifest, model/Markov JSON, response CSV.

All matrices are stored as flat row-major arrays next to their dimensions.
Floating-point values are written as 17-significant-digit decimal text (CSV)
or native JSON numbers, so a round trip preserves the values exactly and
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .analysis import ComparisonReport, FrequencyResponse
from .era import IdentifiedModel
from .okid import MarkovParameterSet
from .state_space import StateSpaceModel, TimeSeriesDataset


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _flat(a: np.ndarray) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel(order="C")]


def _unflat(values, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size != rows * cols:
        raise ValueError(f"{name} must hold {rows * cols} entries, got {arr.size}")
    return arr.reshape(rows, cols)


def _dump_json(obj: dict, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# dataset CSV + sidecar manifest


def save_dataset(data: TimeSeriesDataset, csv_path: Union[str, Path]) -> None:
    """Write `k,u_0..,y_0..` rows plus a `<stem>.manifest.json` sidecar."""
    csv_path = Path(csv_path)
    header = (
        ["k"]
        + [f"u_{j}" for j in range(data.m)]
        + [f"y_{i}" for i in range(data.q)]
    )
    lines = [",".join(header)]
    for k in range(data.length):
        row = [str(k)] + [_fmt(v) for v in data.u[k]] + [_fmt(v) for v in data.y[k]]
        lines.append(",".join(row))
    csv_path.write_text("\n".join(lines) + "\n")
    _dump_json(
        {
            "sample_rate": data.sample_rate,
            "m": data.m,
            "q": data.q,
            "length": data.length,
        },
        manifest_path(csv_path),
    )


def manifest_path(csv_path: Union[str, Path]) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".manifest.json")


def load_dataset(
    csv_path: Union[str, Path], sample_rate: Optional[float] = None
) -> TimeSeriesDataset:
    """Read a dataset CSV, taking the sample rate from the sidecar manifest
    unless one is passed explicitly."""
    csv_path = Path(csv_path)
    if sample_rate is None:
        mpath = manifest_path(csv_path)
        if mpath.exists():
            sample_rate = float(json.loads(mpath.read_text())["sample_rate"])
        else:
            raise ValueError(
                f"{csv_path}: no manifest at {mpath} and no sample rate given"
            )

    lines = csv_path.read_text().splitlines()
    if not lines:
        raise ValueError(f"{csv_path}: file is empty")
    header = lines[0].split(",")
    if header[0] != "k":
        raise ValueError(f"{csv_path}, line 1: header must start with 'k', got {header[0]!r}")
    m = sum(1 for h in header if h.startswith("u_"))
    q = sum(1 for h in header if h.startswith("y_"))
    if m == 0 or q == 0 or len(header) != 1 + m + q:
        raise ValueError(
            f"{csv_path}, line 1: header must be k,u_0..u_{{m-1}},y_0..y_{{q-1}}"
        )
    u = np.empty((len(lines) - 1, m))
    y = np.empty((len(lines) - 1, q))
    for ln, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(header):
            raise ValueError(
                f"{csv_path}, line {ln}: expected {len(header)} fields, got {len(fields)}"
            )
        for col, (name, raw) in enumerate(zip(header, fields), start=1):
            try:
                value = float(raw)
            except ValueError:
                raise ValueError(
                    f"{csv_path}, line {ln}, column {col} ({name}): "
                    f"non-numeric field {raw!r}"
                ) from None
            if name.startswith("u_"):
                u[ln - 2, int(name[2:])] = value
            elif name.startswith("y_"):
                y[ln - 2, int(name[2:])] = value
    return TimeSeriesDataset(u=u, y=y, sample_rate=sample_rate)


# ---------------------------------------------------------------------------
# model JSON


def model_to_dict(model: Union[StateSpaceModel, IdentifiedModel]) -> dict:
    """Schema: {n, m, q, A, B, C, D, K, singular_values, diagnostics} with
    flat row-major matrices.  K is null for a plain plant."""
    if isinstance(model, IdentifiedModel):
        ss = model.model
        K = _flat(model.K)
        sv = [float(v) for v in model.singular_values]
        diagnostics = model.diagnostics
    else:
        ss, K, sv, diagnostics = model, None, [], {}
    return {
        "n": ss.n,
        "m": ss.m,
        "q": ss.q,
        "A": _flat(ss.A),
        "B": _flat(ss.B),
        "C": _flat(ss.C),
        "D": _flat(ss.D),
        "K": K,
        "singular_values": sv,
        "diagnostics": diagnostics,
    }


def save_model(model: Union[StateSpaceModel, IdentifiedModel], path: Union[str, Path]) -> None:
    _dump_json(model_to_dict(model), path)


def load_model(path: Union[str, Path]) -> Union[StateSpaceModel, IdentifiedModel]:
    """Load a model JSON; returns an IdentifiedModel when a gain is present."""
    raw = json.loads(Path(path).read_text())
    n, m, q = int(raw["n"]), int(raw["m"]), int(raw["q"])
    ss = StateSpaceModel(
        A=_unflat(raw["A"], n, n, "A"),
        B=_unflat(raw["B"], n, m, "B"),
        C=_unflat(raw["C"], q, n, "C"),
        D=_unflat(raw["D"], q, m, "D"),
    )
    if raw.get("K") is None:
        return ss
    return IdentifiedModel(
        model=ss,
        K=_unflat(raw["K"], n, q, "K"),
        order=n,
        singular_values=np.asarray(raw.get("singular_values", []), dtype=float),
        diagnostics=raw.get("diagnostics", {}),
    )


# ---------------------------------------------------------------------------
# Markov parameter JSON


def markov_to_dict(params: MarkovParameterSet) -> dict:
    return {
        "p": params.p,
        "m": params.m,
        "q": params.q,
        "D": _flat(params.D_block),
        "blocks": [_flat(b) for b in params.observer_blocks],
        "warnings": list(params.warnings),
    }


def save_markov(params: MarkovParameterSet, path: Union[str, Path]) -> None:
    _dump_json(markov_to_dict(params), path)


def load_markov(path: Union[str, Path]) -> MarkovParameterSet:
    raw = json.loads(Path(path).read_text())
    p, m, q = int(raw["p"]), int(raw["m"]), int(raw["q"])
    return MarkovParameterSet(
        D_block=_unflat(raw["D"], q, m, "D"),
        observer_blocks=tuple(
            _unflat(b, q, m + q, f"blocks[{i}]") for i, b in enumerate(raw["blocks"])
        ),
        p=p,
        m=m,
        q=q,
        warnings=tuple(raw.get("warnings", [])),
    )


# ---------------------------------------------------------------------------
# frequency response / comparison CSV


def _channel_suffixes(q: int, m: int) -> list:
    if q == 1 and m == 1:
        return [""]
    return [f"_y{i}u{j}" for i in range(q) for j in range(m)]


def save_frequency_response(resp: FrequencyResponse, path: Union[str, Path]) -> None:
    """Columns frequency_hz, re, im, mag_db, phase_deg per channel (suffixed
    `_y{i}u{j}` for multichannel models)."""
    nf, q, m = resp.response.shape
    suffixes = _channel_suffixes(q, m)
    header = ["frequency_hz"]
    for s in suffixes:
        header += [f"re{s}", f"im{s}", f"mag_db{s}", f"phase_deg{s}"]
    lines = [",".join(header)]
    flat = resp.response.reshape(nf, q * m)
    for i in range(nf):
        row = [_fmt(resp.frequencies[i])]
        for v in flat[i]:
            mag = abs(v)
            mag_db = 20.0 * np.log10(mag) if mag > 0 else float("-inf")
            row += [_fmt(v.real), _fmt(v.imag), _fmt(mag_db), _fmt(np.degrees(np.angle(v)))]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_frequency_response(
    path: Union[str, Path], sample_rate: Optional[float] = None
) -> FrequencyResponse:
    """Rebuild a FrequencyResponse from the re/im columns of a response CSV.

    When no sample rate is given, the smallest rate containing the grid
    (twice the highest frequency) is assumed.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: file is empty")
    header = lines[0].split(",")
    re_cols = [i for i, h in enumerate(header) if h.startswith("re")]
    im_cols = [i for i, h in enumerate(header) if h.startswith("im")]
    if header[0] != "frequency_hz" or not re_cols or len(re_cols) != len(im_cols):
        raise ValueError(f"{path}, line 1: not a frequency response CSV")
    n_chan = len(re_cols)
    # Channel count factors as q*m; a SISO file has one unsuffixed channel and
    # multichannel files are reshaped from the y-major suffix order.
    if header[re_cols[0]] == "re":
        q = m = 1
    else:
        ys = {h.split("_y")[1].split("u")[0] for h in header if h.startswith("re_y")}
        q = len(ys)
        m = n_chan // q
    freqs = np.empty(len(lines) - 1)
    resp = np.empty((len(lines) - 1, q, m), dtype=complex)
    for ln, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        try:
            freqs[ln - 2] = float(fields[0])
            vals = [
                complex(float(fields[rc]), float(fields[ic]))
                for rc, ic in zip(re_cols, im_cols)
            ]
        except (ValueError, IndexError):
            raise ValueError(f"{path}, line {ln}: malformed row") from None
        resp[ln - 2] = np.asarray(vals).reshape(q, m)
    if sample_rate is None:
        sample_rate = 2.0 * float(np.max(freqs)) if freqs.size else 1.0
    return FrequencyResponse(frequencies=freqs, response=resp, sample_rate=sample_rate)


def save_comparison(report: ComparisonReport, path: Union[str, Path]) -> None:
    nf, q, m = report.mag_err_db.shape
    suffixes = _channel_suffixes(q, m)
    header = ["frequency_hz"]
    for s in suffixes:
        header += [f"mag_err_db{s}", f"phase_err_deg{s}", f"excluded{s}"]
    lines = [",".join(header)]
    mag = report.mag_err_db.reshape(nf, q * m)
    ph = report.phase_err_deg.reshape(nf, q * m)
    ex = report.excluded.reshape(nf, q * m)
    for i in range(nf):
        row = [_fmt(report.frequencies[i])]
        for c in range(q * m):
            row += [_fmt(mag[i, c]), _fmt(ph[i, c]), "1" if ex[i, c] else "0"]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")
