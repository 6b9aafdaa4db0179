"""Free-format MPS reading and writing.

Lets models be cross-checked against external solvers during development.
Floats are written with repr so a dump/load round trip reproduces values
exactly; foreign files are read tolerantly (OBJSENSE, RANGES-free subset).
"""

from __future__ import annotations

import math

from ..errors import ValidationError
from .model import BOOLEAN, CONTINUOUS, EQ, GE, LE, MilpModel

_REL_TO_ROW = {LE: "L", GE: "G", EQ: "E"}
_ROW_TO_REL = {"L": LE, "G": GE, "E": EQ}


def dump_mps(model: MilpModel) -> str:
    lines = [f"NAME {model.name}", "OBJSENSE", f"    {model.sense.upper()}", "ROWS", " N  OBJ"]
    for row in model.constraints:
        lines.append(f" {_REL_TO_ROW[row.rel]}  {row.name}")
    lines.append("COLUMNS")
    by_col: dict[int, list[tuple[str, float]]] = {j: [] for j in range(model.num_vars)}
    for j, v in model.objective.items():
        by_col[j].append(("OBJ", v))
    for row in model.constraints:
        for j, a in zip(row.idx, row.coef):
            by_col[int(j)].append((row.name, float(a)))
    in_int = False
    for j, var in enumerate(model.variables):
        want_int = var.kind == BOOLEAN
        if want_int and not in_int:
            lines.append("    MARKER                 'MARKER'                 'INTORG'")
            in_int = True
        if not want_int and in_int:
            lines.append("    MARKER                 'MARKER'                 'INTEND'")
            in_int = False
        entries = by_col[j] or [("OBJ", 0.0)]
        for rname, val in entries:
            lines.append(f"    {var.name}  {rname}  {val!r}")
    if in_int:
        lines.append("    MARKER                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    for row in model.constraints:
        if row.rhs != 0.0:
            lines.append(f"    RHS  {row.name}  {row.rhs!r}")
    lines.append("BOUNDS")
    for var in model.variables:
        if var.kind == BOOLEAN and var.lb == 0.0 and var.ub == 1.0:
            lines.append(f" BV BND  {var.name}")
            continue
        if var.lb == var.ub:
            lines.append(f" FX BND  {var.name}  {var.lb!r}")
            continue
        if var.lb == 0.0 and math.isinf(var.ub):
            continue
        if math.isinf(var.lb):
            lines.append(f" MI BND  {var.name}")
        elif var.lb != 0.0:
            lines.append(f" LO BND  {var.name}  {var.lb!r}")
        if math.isfinite(var.ub):
            lines.append(f" UP BND  {var.name}  {var.ub!r}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def load_mps(text: str) -> MilpModel:
    section = None
    sense = "min"  # MPS default
    name = "model"
    rows: list[tuple[str, str]] = []
    obj_row = None
    cols: dict[str, dict[str, float]] = {}
    col_kinds: dict[str, str] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    bounds: dict[str, dict[str, float | None]] = {}
    in_int = False
    pending_objsense = False

    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        is_header = not raw[0].isspace()
        tok = raw.split()
        if is_header:
            section = tok[0].upper()
            pending_objsense = section == "OBJSENSE"
            if section == "NAME" and len(tok) > 1:
                name = tok[1]
            if section == "OBJSENSE" and len(tok) > 1:
                sense = tok[1].lower()
                pending_objsense = False
            continue
        if pending_objsense:
            sense = tok[0].lower()
            pending_objsense = False
            continue
        if section == "ROWS":
            kind, rname = tok[0].upper(), tok[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
            else:
                rows.append((kind, rname))
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1].strip("'").upper() == "MARKER":
                in_int = tok[2].strip("'").upper() == "INTORG"
                continue
            cname = tok[0]
            if cname not in cols:
                cols[cname] = {}
                col_order.append(cname)
                col_kinds[cname] = BOOLEAN if in_int else CONTINUOUS
            for rname, val in zip(tok[1::2], tok[2::2]):
                cols[cname][rname] = cols[cname].get(rname, 0.0) + float(val)
        elif section == "RHS":
            for rname, val in zip(tok[1::2], tok[2::2]):
                rhs[rname] = float(val)
        elif section == "BOUNDS":
            btype, cname = tok[0].upper(), tok[2]
            val = float(tok[3]) if len(tok) > 3 else None
            bnd = bounds.setdefault(cname, {})
            if btype == "UP":
                bnd["ub"] = val
            elif btype == "LO":
                bnd["lb"] = val
            elif btype == "FX":
                bnd["lb"] = bnd["ub"] = val
            elif btype == "BV":
                bnd["lb"], bnd["ub"] = 0.0, 1.0
                col_kinds[cname] = BOOLEAN
            elif btype == "MI":
                bnd["lb"] = -math.inf
            elif btype == "PL":
                bnd["ub"] = math.inf
            else:
                raise ValidationError(f"unsupported bound type {btype!r}")
        elif section == "RANGES":
            raise ValidationError("RANGES sections are not supported")

    if sense not in ("max", "min"):
        raise ValidationError(f"bad objective sense {sense!r}")
    model = MilpModel(sense=sense, name=name)
    col_idx: dict[str, int] = {}
    for cname in col_order:
        kind = col_kinds[cname]
        bnd = bounds.get(cname, {})
        lb = bnd.get("lb", 0.0)
        default_ub = 1.0 if kind == BOOLEAN else math.inf
        ub = bnd.get("ub", default_ub)
        col_idx[cname] = model.add_var(cname, kind=kind, lb=lb, ub=ub)
    obj = {}
    for cname, entries in cols.items():
        if obj_row in entries:
            obj[col_idx[cname]] = entries[obj_row]
    model.set_objective(obj)
    for kind, rname in rows:
        terms = [
            (col_idx[cname], entries[rname])
            for cname, entries in cols.items()
            if rname in entries
        ]
        terms.sort()
        model.add_constr(terms, _ROW_TO_REL[kind], rhs.get(rname, 0.0), name=rname)
    return model
