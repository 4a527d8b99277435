"""MPS reader and writer.

The reader accepts free-format MPS by default (whitespace-delimited fields)
and strict fixed columns via the dialect flag.  Supported sections: NAME,
OBJSENSE, ROWS (N/L/G/E), COLUMNS (with INTORG/INTEND markers), RHS, RANGES,
BOUNDS (LO/UP/FX/FR/MI/PL/BV), ENDATA.

Everything is normalized into the internal form: L rows are negated into
>= rows, ranged rows are split into two one-sided inequalities, an RHS entry
on the objective row becomes a (negated) constant offset, and OBJSENSE MAX
flips the objective while recording the sign for reporting.  Integer
markers are either relaxed with a warning or rejected, per the dialect.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import (
    DuplicateColumn,
    DuplicateRow,
    IntegerSectionRejected,
    MpsSyntaxError,
    UnknownRowReference,
)
from .problem import LpProblem
from .sparse import SparseMatrix

_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_BOUND_CODES_WITH_VALUE = {"LO", "UP", "FX"}
_BOUND_CODES_BARE = {"FR", "MI", "PL", "BV"}

# 0-based slices of the six fixed-format fields.
_FIXED_FIELDS = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]


@dataclass(frozen=True)
class MpsDialect:
    fixed_columns: bool = False
    integer_handling: str = "relax_with_warning"  # or "reject"


def _value(token, line_no):
    try:
        return float(token)
    except ValueError:
        pass
    try:
        # Fortran-style exponents show up in old files.
        return float(token.upper().replace("D", "E"))
    except ValueError:
        raise MpsSyntaxError(f"bad numeric literal {token!r}", line_no) from None


class _Parser:
    def __init__(self, dialect):
        self.dialect = dialect or MpsDialect()
        self.name = ""
        self.objsense = 1
        self.obj_row = None
        self.row_type = {}  # name -> N | L | G | E | F (F = extra free row)
        self.row_order = []
        self.col_order = []
        self.col_index = {}
        self.obj_coef = {}
        self.entries = {}  # row name -> list of (col index, value)
        self.seen = set()  # (col, row) pairs, for duplicate detection
        self.rhs = {}
        self.ranges = {}
        self.obj_offset = 0.0
        self.bound_records = []  # (code, col index, value, line_no)
        self.integer_cols = set()
        self.in_integer = False

    # -- tokenization ----------------------------------------------------

    def fields(self, line):
        if self.dialect.fixed_columns:
            out = []
            for a, b in _FIXED_FIELDS:
                piece = line[a:b].strip()
                if piece:
                    out.append(piece)
            return out
        return line.split()

    # -- section handlers --------------------------------------------------

    def handle_rows(self, toks, line_no):
        if len(toks) != 2:
            raise MpsSyntaxError(f"ROWS line needs 2 fields, got {len(toks)}", line_no)
        rtype, name = toks[0].upper(), toks[1]
        if rtype not in ("N", "L", "G", "E"):
            raise MpsSyntaxError(f"unknown row type {toks[0]!r}", line_no)
        if name in self.row_type:
            raise DuplicateRow(f"row {name!r} declared twice", line_no)
        if rtype == "N":
            if self.obj_row is None:
                self.obj_row = name
            else:
                rtype = "F"  # extra free row: legal to reference, dropped at build
        self.row_type[name] = rtype
        self.row_order.append(name)

    def handle_columns(self, toks, line_no):
        if "'MARKER'" in toks:
            if "'INTORG'" in toks:
                if self.dialect.integer_handling == "reject":
                    raise IntegerSectionRejected("integer marker section", line_no)
                self.in_integer = True
            elif "'INTEND'" in toks:
                self.in_integer = False
            else:
                raise MpsSyntaxError("marker line without INTORG/INTEND", line_no)
            return
        if len(toks) < 3 or len(toks) % 2 == 0:
            raise MpsSyntaxError("COLUMNS line needs a column plus (row, value) pairs", line_no)
        col = toks[0]
        if col not in self.col_index:
            self.col_index[col] = len(self.col_order)
            self.col_order.append(col)
        j = self.col_index[col]
        if self.in_integer:
            self.integer_cols.add(col)
        for row, raw in zip(toks[1::2], toks[2::2]):
            if row not in self.row_type:
                raise UnknownRowReference(f"COLUMNS references unknown row {row!r}", line_no)
            if (col, row) in self.seen:
                raise DuplicateColumn(f"duplicate coefficient for ({col!r}, {row!r})", line_no)
            self.seen.add((col, row))
            val = _value(raw, line_no)
            if row == self.obj_row:
                self.obj_coef[j] = val
            elif self.row_type[row] != "F":
                self.entries.setdefault(row, []).append((j, val))

    def _pairs(self, toks, line_no, section):
        if len(toks) % 2 == 1:
            toks = toks[1:]  # leading set name
        if not toks:
            raise MpsSyntaxError(f"{section} line has no (row, value) pairs", line_no)
        return zip(toks[0::2], toks[1::2])

    def handle_rhs(self, toks, line_no):
        for row, raw in self._pairs(toks, line_no, "RHS"):
            if row not in self.row_type:
                raise UnknownRowReference(f"RHS references unknown row {row!r}", line_no)
            val = _value(raw, line_no)
            if row == self.obj_row:
                # Constant shift: an objective-row RHS r means minimize c'x - r.
                self.obj_offset = -val
            elif self.row_type[row] != "F":
                self.rhs[row] = val

    def handle_ranges(self, toks, line_no):
        for row, raw in self._pairs(toks, line_no, "RANGES"):
            if row not in self.row_type:
                raise UnknownRowReference(f"RANGES references unknown row {row!r}", line_no)
            if self.row_type[row] in ("N", "F"):
                raise MpsSyntaxError(f"range on objective/free row {row!r}", line_no)
            self.ranges[row] = _value(raw, line_no)

    def handle_bounds(self, toks, line_no):
        if not toks:
            raise MpsSyntaxError("empty BOUNDS line", line_no)
        code = toks[0].upper()
        if code in _BOUND_CODES_WITH_VALUE:
            if len(toks) == 4:
                col, raw = toks[2], toks[3]
            elif len(toks) == 3:
                col, raw = toks[1], toks[2]
            else:
                raise MpsSyntaxError(f"bound code {code} needs a column and a value", line_no)
            val = _value(raw, line_no)
        elif code in _BOUND_CODES_BARE:
            if len(toks) == 3:
                col = toks[2]
            elif len(toks) == 2:
                col = toks[1]
            else:
                raise MpsSyntaxError(f"bound code {code} takes no value", line_no)
            val = None
        else:
            raise MpsSyntaxError(f"unknown bound code {toks[0]!r}", line_no)
        if col not in self.col_index:
            raise MpsSyntaxError(f"BOUNDS references unknown column {col!r}", line_no)
        if code == "BV":
            if self.dialect.integer_handling == "reject":
                raise IntegerSectionRejected("BV bound marks an integer column", line_no)
            self.integer_cols.add(col)
        self.bound_records.append((code, self.col_index[col], val, line_no))

    def handle_objsense(self, toks, line_no):
        word = toks[-1].upper()
        if word in ("MIN", "MINIMIZE"):
            self.objsense = 1
        elif word in ("MAX", "MAXIMIZE"):
            self.objsense = -1
        else:
            raise MpsSyntaxError(f"unknown objective sense {toks[-1]!r}", line_no)

    # -- assembly ----------------------------------------------------------

    def build(self):
        if self.obj_row is None:
            raise MpsSyntaxError("no objective (N) row declared")
        n = len(self.col_order)
        c = np.zeros(n)
        for j, val in self.obj_coef.items():
            c[j] = val

        lower = np.zeros(n)
        upper = np.full(n, np.inf)
        lower_touched = np.zeros(n, dtype=bool)
        for code, j, val, _line in self.bound_records:
            if code == "LO":
                lower[j] = val
                lower_touched[j] = True
            elif code == "UP":
                upper[j] = val
                if val < 0 and not lower_touched[j]:
                    # Classic quirk: a negative upper bound on a default-lower
                    # column frees the lower bound.
                    lower[j] = -np.inf
            elif code == "FX":
                lower[j] = upper[j] = val
                lower_touched[j] = True
            elif code == "FR":
                lower[j] = -np.inf
                upper[j] = np.inf
                lower_touched[j] = True
            elif code == "MI":
                lower[j] = -np.inf
                lower_touched[j] = True
            elif code == "PL":
                upper[j] = np.inf
            elif code == "BV":
                lower[j] = 0.0
                upper[j] = 1.0
                lower_touched[j] = True

        ineq_rows = []  # (cols, vals, rhs, name)
        eq_rows = []
        for row in self.row_order:
            rtype = self.row_type[row]
            if rtype in ("N", "F"):
                continue
            items = self.entries.get(row, [])
            cols = np.array([j for j, _ in items], dtype=np.int64)
            vals = np.array([v for _, v in items])
            h = self.rhs.get(row, 0.0)
            rng = self.ranges.get(row)
            if rtype == "E":
                if rng is None or rng == 0.0:
                    eq_rows.append((cols, vals, h, row))
                    continue
                lo, hi = (h, h + rng) if rng > 0 else (h + rng, h)
                ineq_rows.append((cols, vals, lo, row))
                ineq_rows.append((cols, -vals, -hi, row + "__rng"))
            elif rtype == "G":
                ineq_rows.append((cols, vals, h, row))
                if rng is not None:
                    ineq_rows.append((cols, -vals, -(h + abs(rng)), row + "__rng"))
            elif rtype == "L":
                ineq_rows.append((cols, -vals, -h, row))
                if rng is not None:
                    ineq_rows.append((cols, vals, h - abs(rng), row + "__rng"))

        def stack(rows):
            if not rows:
                return sp.csr_matrix((0, n)), np.zeros(0), []
            r_idx = np.concatenate(
                [np.full(len(cols), i, dtype=np.int64) for i, (cols, _, _, _) in enumerate(rows)]
            ) if any(len(cols) for cols, _, _, _ in rows) else np.zeros(0, dtype=np.int64)
            c_idx = np.concatenate([cols for cols, _, _, _ in rows]) if len(r_idx) else np.zeros(0, dtype=np.int64)
            v = np.concatenate([vals for _, vals, _, _ in rows]) if len(r_idx) else np.zeros(0)
            mat = sp.coo_matrix((v, (r_idx, c_idx)), shape=(len(rows), n)).tocsr()
            return mat, np.array([h for _, _, h, _ in rows]), [nm for _, _, _, nm in rows]

        g_mat, h_vec, g_names = stack(ineq_rows)
        a_mat, b_vec, a_names = stack(eq_rows)

        offset = self.obj_offset
        sign = 1
        if self.objsense == -1:
            c = -c
            offset = -offset
            sign = -1

        if self.integer_cols:
            warnings.warn(
                f"{len(self.integer_cols)} integer column(s) relaxed to continuous",
                stacklevel=3,
            )

        return LpProblem(
            c=c,
            ineq_matrix=SparseMatrix(g_mat, shape=(len(ineq_rows), n)),
            ineq_rhs=h_vec,
            eq_matrix=SparseMatrix(a_mat, shape=(len(eq_rows), n)),
            eq_rhs=b_vec,
            lower=lower,
            upper=upper,
            objective_offset=offset,
            objective_sign=sign,
            name=self.name,
            variable_names=list(self.col_order),
            constraint_names=g_names + a_names,
        )


def parse_mps(source, dialect=None):
    """Parse MPS text (str or bytes) into an LpProblem."""
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    parser = _Parser(dialect)
    section = None
    handlers = {
        "ROWS": parser.handle_rows,
        "COLUMNS": parser.handle_columns,
        "RHS": parser.handle_rhs,
        "RANGES": parser.handle_ranges,
        "BOUNDS": parser.handle_bounds,
        "OBJSENSE": parser.handle_objsense,
    }
    for line_no, raw in enumerate(source.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if raw[0] not in " \t":
            toks = raw.split()
            keyword = toks[0].upper()
            if keyword not in _SECTIONS:
                raise MpsSyntaxError(f"unknown section {toks[0]!r}", line_no)
            if keyword == "ENDATA":
                section = "ENDATA"
                break
            section = keyword
            if keyword == "NAME":
                parser.name = toks[1] if len(toks) > 1 else ""
            elif keyword == "OBJSENSE" and len(toks) > 1:
                parser.handle_objsense(toks[1:], line_no)
            continue
        if section is None:
            raise MpsSyntaxError("data line before any section header", line_no)
        if section == "NAME":
            raise MpsSyntaxError("unexpected data line after NAME", line_no)
        handler = handlers.get(section)
        if handler is None:
            raise MpsSyntaxError(f"data line in unsupported section {section}", line_no)
        handler(parser.fields(raw), line_no)
    if section != "ENDATA":
        warnings.warn("MPS input ended without ENDATA", stacklevel=2)
    return parser.build()


def read_mps(path, dialect=None):
    with open(path, "rb") as fh:
        return parse_mps(fh.read(), dialect)


def _fmt(v):
    return f"{v:.17g}"


def write_mps(problem, name=None):
    """Serialize an LpProblem as free-format MPS text.

    The written file reparses to an equivalent problem: >= rows are emitted
    as G rows, equalities as E rows, maximization problems get an OBJSENSE
    section with the original (un-negated) objective.
    """
    n = problem.num_variables
    var_names = problem.variable_names or [f"X{j}" for j in range(n)]
    m1 = problem.num_inequalities
    m2 = problem.num_equalities
    if problem.constraint_names and len(problem.constraint_names) == m1 + m2:
        g_names = problem.constraint_names[:m1]
        a_names = problem.constraint_names[m1:]
    else:
        g_names = [f"R{i}" for i in range(m1)]
        a_names = [f"E{i}" for i in range(m2)]
    obj_name = "OBJ"
    used = set(g_names) | set(a_names)
    while obj_name in used:
        obj_name = "_" + obj_name

    sign = problem.objective_sign
    c_out = sign * problem.c
    rhs_obj = -(sign * problem.objective_offset)

    out = [f"NAME          {name or problem.name or 'LP'}"]
    if sign == -1:
        out.append("OBJSENSE")
        out.append("    MAX")
    out.append("ROWS")
    out.append(f" N  {obj_name}")
    for nm in g_names:
        out.append(f" G  {nm}")
    for nm in a_names:
        out.append(f" E  {nm}")

    out.append("COLUMNS")
    g_csc = problem.ineq_matrix.tocsr().tocsc()
    a_csc = problem.eq_matrix.tocsr().tocsc()
    for j in range(n):
        col = var_names[j]
        pairs = []
        if c_out[j] != 0.0:
            pairs.append((obj_name, c_out[j]))
        sl = slice(g_csc.indptr[j], g_csc.indptr[j + 1])
        pairs.extend((g_names[i], v) for i, v in zip(g_csc.indices[sl], g_csc.data[sl]))
        sl = slice(a_csc.indptr[j], a_csc.indptr[j + 1])
        pairs.extend((a_names[i], v) for i, v in zip(a_csc.indices[sl], a_csc.data[sl]))
        if not pairs:
            # a column with no coefficients anywhere must still be declared
            # (it may carry bounds), so give it an explicit zero cost
            pairs.append((obj_name, 0.0))
        for row, v in pairs:
            out.append(f"    {col:<10} {row:<10} {_fmt(v)}")

    out.append("RHS")
    if rhs_obj != 0.0:
        out.append(f"    RHS       {obj_name:<10} {_fmt(rhs_obj)}")
    for nm, v in zip(g_names, problem.ineq_rhs):
        if v != 0.0:
            out.append(f"    RHS       {nm:<10} {_fmt(v)}")
    for nm, v in zip(a_names, problem.eq_rhs):
        if v != 0.0:
            out.append(f"    RHS       {nm:<10} {_fmt(v)}")

    bound_lines = []
    for j in range(n):
        col = var_names[j]
        lo, hi = problem.lower[j], problem.upper[j]
        if lo == 0.0 and hi == np.inf:
            continue
        if lo == hi:
            bound_lines.append(f" FX BND       {col:<10} {_fmt(lo)}")
            continue
        if lo == -np.inf and hi == np.inf:
            bound_lines.append(f" FR BND       {col}")
            continue
        if lo == -np.inf:
            bound_lines.append(f" MI BND       {col}")
        elif lo != 0.0:
            bound_lines.append(f" LO BND       {col:<10} {_fmt(lo)}")
        if hi != np.inf:
            bound_lines.append(f" UP BND       {col:<10} {_fmt(hi)}")
    if bound_lines:
        out.append("BOUNDS")
        out.extend(bound_lines)
    out.append("ENDATA")
    return "\n".join(out) + "\n"
