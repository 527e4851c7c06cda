"""LaTeX subset parser and serializer for symbol layout trees.

Supported grammar: letters/digits/operators, Greek and named-symbol
commands, ``{...}`` grouping, ``^`` and ``_`` scripts, ``\\frac``,
``\\sqrt`` (with optional index), ``\\left``/``\\right`` delimiter pairs,
matrix-family environments with ``&`` and ``\\\\``, accents, text runs,
and wildcards written ``?`` or ``\\qvar{id}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .slt import MatrixNode, Relation, SymbolLayoutTree, SymbolNode, matrix_symbol

FRAC = "FRAC"
SQRT = "SQRT"
WILDCARD = "?"

GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta",
    "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi", "pi",
    "varpi", "rho", "varrho", "sigma", "varsigma", "tau", "upsilon", "phi",
    "varphi", "chi", "psi", "omega",
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega",
}

NAMED_SYMBOLS = {
    "sum", "prod", "coprod", "int", "oint", "infty", "pm", "mp", "times",
    "div", "cdot", "circ", "bullet", "ast", "star", "leq", "le", "geq", "ge",
    "neq", "ne", "equiv", "approx", "cong", "sim", "simeq", "propto", "ll",
    "gg", "subset", "supset", "subseteq", "supseteq", "in", "notin", "ni",
    "cup", "cap", "setminus", "emptyset", "varnothing", "forall", "exists",
    "nexists", "neg", "lnot", "land", "lor", "wedge", "vee", "oplus",
    "ominus", "otimes", "odot", "dagger", "ddagger", "rightarrow", "to",
    "leftarrow", "gets", "Rightarrow", "Leftarrow", "leftrightarrow",
    "Leftrightarrow", "mapsto", "longrightarrow", "uparrow", "downarrow",
    "partial", "nabla", "hbar", "ell", "Re", "Im", "aleph", "prime", "angle",
    "perp", "parallel", "mid", "ldots", "cdots", "vdots", "ddots", "dots",
    "top", "bot",
}

FUNCTION_NAMES = {
    "sin", "cos", "tan", "cot", "sec", "csc", "arcsin", "arccos", "arctan",
    "sinh", "cosh", "tanh", "coth", "log", "ln", "lg", "exp", "min", "max",
    "sup", "inf", "lim", "liminf", "limsup", "arg", "det", "gcd", "deg",
    "dim", "ker", "hom", "Pr", "bmod",
}

DELIM_COMMANDS = {
    "langle", "rangle", "lfloor", "rfloor", "lceil", "rceil", "vert", "Vert",
    "lbrace", "rbrace", "lbrack", "rbrack", "backslash",
}

#: Commands that become a single symbol node, keyed by backslash-less name.
COMMAND_SYMBOLS = GREEK | NAMED_SYMBOLS | FUNCTION_NAMES | DELIM_COMMANDS

ACCENTS = {
    "bar", "hat", "tilde", "vec", "dot", "ddot", "overline", "underline",
    "widehat", "widetilde",
}

MATRIX_ENVS = {"matrix", "pmatrix", "bmatrix", "vmatrix", "Vmatrix", "cases"}

TEXT_COMMANDS = {"mbox", "text", "textrm", "textit", "textbf", "operatorname"}

#: Style commands taking one group argument whose contents are spliced in.
STYLE_WRAPPERS = {
    "mathrm", "mathbf", "mathit", "mathcal", "mathbb", "mathfrak", "mathsf",
    "mathtt", "boldsymbol", "bm",
}

#: Style / spacing commands dropped entirely.
STYLE_BARE = {
    "displaystyle", "textstyle", "scriptstyle", "scriptscriptstyle",
    "rm", "bf", "it", "sf", "tt", "limits", "nolimits",
    ",", ";", ":", "!", " ", "quad", "qquad", "enspace", "thinspace",
    "big", "Big", "bigg", "Bigg", "bigl", "bigr", "Bigl", "Bigr",
    "biggl", "biggr", "bigm", "Bigm",
}

#: Characters accepted verbatim as one-symbol tokens.
_SPECIAL_CHARS = set("{}^_&\\$%~#")


class ParseError(Exception):
    """Raised for input outside the supported grammar."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.message = message
        self.pos = pos


@dataclass
class LatexToken:
    kind: str   # symbol | command | group-open | group-close | superscript-op
    #             | subscript-op | alignment-tab | row-break
    #             | environment-begin | environment-end | wildcard
    text: str
    pos: int


def tokenize(src: str) -> list[LatexToken]:
    tokens: list[LatexToken] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "\\":
            i = _lex_command(src, i, tokens)
            continue
        if ch == "{":
            tokens.append(LatexToken("group-open", "{", i))
        elif ch == "}":
            tokens.append(LatexToken("group-close", "}", i))
        elif ch == "^":
            tokens.append(LatexToken("superscript-op", "^", i))
        elif ch == "_":
            tokens.append(LatexToken("subscript-op", "_", i))
        elif ch == "&":
            tokens.append(LatexToken("alignment-tab", "&", i))
        elif ch == "?":
            tokens.append(LatexToken("wildcard", "?", i))
        elif ch == "%":
            while i < n and src[i] != "\n":
                i += 1
            continue
        elif ch in "$~#":
            raise ParseError(f"unexpected {ch!r}", i)
        else:
            tokens.append(LatexToken("symbol", ch, i))
        i += 1
    return tokens


def _lex_command(src: str, i: int, tokens: list[LatexToken]) -> int:
    """Lex the command starting at ``src[i] == '\\\\'``; return the next index."""
    n = len(src)
    start = i
    i += 1
    if i >= n:
        raise ParseError("dangling backslash", start)
    if not src[i].isalpha():
        ch = src[i]
        if ch == "\\":
            tokens.append(LatexToken("row-break", "\\\\", start))
        elif ch in STYLE_BARE:
            pass
        elif ch in "{}|$%&#_":
            tokens.append(LatexToken("symbol", ch, start))
        else:
            raise ParseError(f"unknown command '\\{ch}'", start)
        return i + 1

    j = i
    while j < n and src[j].isalpha():
        j += 1
    name = src[i:j]

    if name in ("begin", "end"):
        j2, env = _read_braced(src, j, start)
        kind = "environment-begin" if name == "begin" else "environment-end"
        tokens.append(LatexToken(kind, env, start))
        return j2
    if name == "qvar":
        j2, ident = _read_braced(src, j, start)
        tokens.append(LatexToken("wildcard", ident or "?", start))
        return j2
    if name in TEXT_COMMANDS:
        j2, content = _read_braced(src, j, start)
        content = content.strip()
        if content:
            tokens.append(LatexToken("symbol", content, start))
        return j2
    if name in STYLE_BARE:
        return j
    if name in STYLE_WRAPPERS:
        # Drop the command; the following group is parsed inline.
        return j
    if name in COMMAND_SYMBOLS:
        tokens.append(LatexToken("symbol", name, start))
        return j
    if name in ("frac", "sqrt", "left", "right", "overset", "underset") or name in ACCENTS:
        tokens.append(LatexToken("command", name, start))
        return j
    raise ParseError(f"unknown command '\\{name}'", start)


def _read_braced(src: str, i: int, cmd_pos: int) -> tuple[int, str]:
    """Read a balanced ``{...}`` group immediately after position ``i``."""
    n = len(src)
    while i < n and src[i].isspace():
        i += 1
    if i >= n or src[i] != "{":
        raise ParseError("expected '{' after command", cmd_pos)
    depth = 0
    j = i
    while j < n:
        if src[j] == "{":
            depth += 1
        elif src[j] == "}":
            depth -= 1
            if depth == 0:
                return j + 1, src[i + 1:j]
        j += 1
    raise ParseError("unbalanced '{'", i)


class _Cursor:
    def __init__(self, tokens: list[LatexToken], end_pos: int):
        self.tokens = tokens
        self.i = 0
        self.end_pos = end_pos

    def peek(self) -> Optional[LatexToken]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> LatexToken:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end_pos)
        self.i += 1
        return tok

    @property
    def pos(self) -> int:
        tok = self.peek()
        return tok.pos if tok is not None else self.end_pos


_SEQUENCE_STOPS = {
    "group-close", "alignment-tab", "row-break", "environment-end",
}


def parse_latex(src: str) -> SymbolLayoutTree:
    """Parse a LaTeX string into its symbol layout tree."""
    if not src or not src.strip():
        raise ParseError("empty formula", 0)
    cur = _Cursor(tokenize(src), len(src))
    head = _parse_sequence(cur)
    tok = cur.peek()
    if tok is not None:
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)
    if head is None:
        raise ParseError("empty formula", 0)
    return SymbolLayoutTree(head)


def _parse_sequence(cur: _Cursor, bracket_stop: bool = False) -> Optional[SymbolNode]:
    """Parse a horizontal chain; stops before group/row/cell boundaries."""
    head: Optional[SymbolNode] = None
    tail: Optional[SymbolNode] = None
    while True:
        tok = cur.peek()
        if tok is None or tok.kind in _SEQUENCE_STOPS:
            break
        if bracket_stop and tok.kind == "symbol" and tok.text == "]":
            break
        if tok.kind == "command" and tok.text == "right":
            break
        if tok.kind in ("superscript-op", "subscript-op"):
            cur.next()
            base = tail
            if base is None:
                raise ParseError("script with no base", tok.pos)
            _attach_script(cur, base, tok)
            continue
        atom_head, atom_tail = _parse_atom(cur, tok)
        if atom_head is None:
            continue
        if head is None:
            head = atom_head
        else:
            assert tail is not None
            tail.children[Relation.NEXT] = atom_head
        tail = atom_tail
    return head


def _attach_script(cur: _Cursor, base: SymbolNode, op: LatexToken) -> None:
    rel = Relation.SUPER if op.kind == "superscript-op" else Relation.SUB
    if rel in base.children:
        raise ParseError(f"duplicate {'^' if rel is Relation.SUPER else '_'} script", op.pos)
    arg = _parse_arg(cur, op.pos)
    if arg is None:
        raise ParseError("empty script", op.pos)
    base.children[rel] = arg


def _parse_arg(cur: _Cursor, at: int) -> Optional[SymbolNode]:
    """One argument: a braced group or a single token atom."""
    tok = cur.peek()
    if tok is None:
        raise ParseError("missing argument", at)
    if tok.kind == "group-open":
        cur.next()
        head = _parse_sequence(cur)
        close = cur.next()
        if close.kind != "group-close":
            raise ParseError("unbalanced '{'", tok.pos)
        return head
    if tok.kind in ("symbol", "command", "wildcard", "environment-begin"):
        h, _t = _parse_atom(cur, tok)
        return h
    raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def _require_arg(cur: _Cursor, at: int, what: str) -> SymbolNode:
    head = _parse_arg(cur, at)
    if head is None:
        raise ParseError(f"empty {what} argument", at)
    return head


def _parse_atom(cur: _Cursor, tok: LatexToken) -> tuple[Optional[SymbolNode], Optional[SymbolNode]]:
    """Parse one atom; returns (chain head, chain tail), possibly (None, None)."""
    if tok.kind == "symbol":
        cur.next()
        node = SymbolNode(tok.text)
        return node, node
    if tok.kind == "wildcard":
        cur.next()
        node = SymbolNode(WILDCARD)
        return node, node
    if tok.kind == "group-open":
        cur.next()
        head = _parse_sequence(cur)
        close = cur.peek()
        if close is None or close.kind != "group-close":
            raise ParseError("unbalanced '{'", tok.pos)
        cur.next()
        if head is None:
            return None, None
        return head, _chain_tail(head)
    if tok.kind == "environment-begin":
        return _parse_environment(cur, tok)
    if tok.kind == "command":
        return _parse_command(cur, tok)
    raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def _chain_tail(head: SymbolNode) -> SymbolNode:
    node = head
    while Relation.NEXT in node.children:
        node = node.children[Relation.NEXT]
    return node


def _parse_command(cur: _Cursor, tok: LatexToken) -> tuple[Optional[SymbolNode], Optional[SymbolNode]]:
    cur.next()
    name = tok.text
    if name == "frac":
        try:
            above = _require_arg(cur, tok.pos, "\\frac")
            below = _require_arg(cur, tok.pos, "\\frac")
        except ParseError as e:
            raise ParseError(f"\\frac: {e.message}", e.pos) from None
        node = SymbolNode(FRAC, {Relation.ABOVE: above, Relation.BELOW: below})
        return node, node
    if name == "sqrt":
        children: dict[Relation, SymbolNode] = {}
        nxt = cur.peek()
        if nxt is not None and nxt.kind == "symbol" and nxt.text == "[":
            cur.next()
            idx = _parse_sequence(cur, bracket_stop=True)
            close = cur.peek()
            if close is None or close.kind != "symbol" or close.text != "]":
                raise ParseError("unbalanced '[' in \\sqrt index", nxt.pos)
            cur.next()
            if idx is not None:
                children[Relation.ABOVE] = idx
        children[Relation.WITHIN] = _require_arg(cur, tok.pos, "\\sqrt")
        node = SymbolNode(SQRT, children)
        return node, node
    if name in ACCENTS:
        content = _require_arg(cur, tok.pos, f"\\{name}")
        node = SymbolNode(name, {Relation.WITHIN: content})
        return node, node
    if name in ("overset", "underset"):
        deco = _require_arg(cur, tok.pos, f"\\{name}")
        base = _require_arg(cur, tok.pos, f"\\{name}")
        target = _chain_tail(base)
        rel = Relation.ABOVE if name == "overset" else Relation.BELOW
        if rel in target.children:
            raise ParseError(f"\\{name} on decorated base", tok.pos)
        target.children[rel] = deco
        return base, target
    if name == "left":
        return _parse_delimited(cur, tok)
    if name == "right":
        raise ParseError("\\right without matching \\left", tok.pos)
    raise ParseError(f"unknown command '\\{name}'", tok.pos)


def _parse_delimited(cur: _Cursor, left_tok: LatexToken) -> tuple[Optional[SymbolNode], Optional[SymbolNode]]:
    open_sym = _read_delimiter(cur, left_tok.pos)
    inner = _parse_sequence(cur)
    closing = cur.peek()
    if closing is None or closing.kind != "command" or closing.text != "right":
        raise ParseError("\\left without matching \\right", left_tok.pos)
    cur.next()
    close_sym = _read_delimiter(cur, closing.pos)

    pieces = [SymbolNode(s) for s in (open_sym,) if s is not None]
    if inner is not None:
        pieces.append(inner)
    if close_sym is not None:
        pieces.append(SymbolNode(close_sym))
    if not pieces:
        return None, None
    for a, b in zip(pieces, pieces[1:]):
        _chain_tail(a).children[Relation.NEXT] = b
    return pieces[0], _chain_tail(pieces[-1])


_DELIM_CHARS = set("()[]|/.<>")


def _read_delimiter(cur: _Cursor, at: int) -> Optional[str]:
    tok = cur.peek()
    if tok is not None and tok.kind == "symbol" and (
        tok.text in _DELIM_CHARS or tok.text in "{}" or tok.text in DELIM_COMMANDS
    ):
        cur.next()
        return None if tok.text == "." else tok.text
    raise ParseError("expected delimiter after \\left/\\right", at)


def _parse_environment(cur: _Cursor, tok: LatexToken) -> tuple[SymbolNode, SymbolNode]:
    env = tok.text
    if env not in MATRIX_ENVS:
        raise ParseError(f"unsupported environment {env!r}", tok.pos)
    cur.next()
    rows: list[list[Optional[SymbolLayoutTree]]] = []
    row: list[Optional[SymbolLayoutTree]] = []
    while True:
        cell = _parse_sequence(cur)
        row.append(SymbolLayoutTree(cell) if cell is not None else None)
        sep = cur.peek()
        if sep is None:
            raise ParseError(f"unterminated environment {env!r}", tok.pos)
        if sep.kind == "alignment-tab":
            cur.next()
            continue
        if sep.kind == "row-break":
            cur.next()
            rows.append(row)
            row = []
            continue
        if sep.kind == "environment-end":
            if sep.text != env:
                raise ParseError(
                    f"environment mismatch: began {env!r}, ended {sep.text!r}", sep.pos
                )
            cur.next()
            if row and any(c is not None for c in row):
                rows.append(row)
            break
        raise ParseError(f"unexpected {sep.text!r} in environment", sep.pos)
    if not rows:
        raise ParseError(f"empty environment {env!r}", tok.pos)
    cols = max(len(r) for r in rows)
    if env == "cases":
        cols = max(cols, 2)
    padded = [r + [None] * (cols - len(r)) for r in rows]
    node = matrix_symbol(MatrixNode(len(rows), cols, padded))
    return node, node


# ---------------------------------------------------------------------------
# Serialization back to LaTeX


def to_latex(t: SymbolLayoutTree, compact: bool = False) -> str:
    """Emit LaTeX that re-parses to a tree with the same canonical key.

    ``compact`` omits script braces around single-character arguments
    (``x^2`` instead of ``x^{2}``); used for stable cell payload strings.
    """
    return _emit_chain(t.root, compact)


def _emit_chain(node: Optional[SymbolNode], compact: bool) -> str:
    out = []
    while node is not None:
        out.append(_emit_node(node, compact))
        node = node.children.get(Relation.NEXT)
    return "".join(out)


def _emit_node(n: SymbolNode, compact: bool) -> str:
    consumed: set[Relation] = {Relation.NEXT}
    if n.matrix is not None:
        rows = []
        for row in n.matrix.cells:
            rows.append("&".join(
                "" if cell is None else _emit_chain(cell.root, compact) for cell in row
            ))
        base = "\\begin{matrix}" + "\\\\".join(rows) + "\\end{matrix}"
    elif n.label == FRAC:
        above = _emit_chain(n.children.get(Relation.ABOVE), compact)
        below = _emit_chain(n.children.get(Relation.BELOW), compact)
        consumed |= {Relation.ABOVE, Relation.BELOW}
        base = f"\\frac{{{above}}}{{{below}}}"
    elif n.label == SQRT:
        within = _emit_chain(n.children.get(Relation.WITHIN), compact)
        consumed.add(Relation.WITHIN)
        if Relation.ABOVE in n.children:
            idx = _emit_chain(n.children[Relation.ABOVE], compact)
            consumed.add(Relation.ABOVE)
            base = f"\\sqrt[{idx}]{{{within}}}"
        else:
            base = f"\\sqrt{{{within}}}"
    elif n.label in ACCENTS and Relation.WITHIN in n.children:
        content = _emit_chain(n.children[Relation.WITHIN], compact)
        consumed.add(Relation.WITHIN)
        base = f"\\{n.label}{{{content}}}"
    else:
        base = _emit_symbol(n.label)

    sub = n.children.get(Relation.SUB)
    if sub is not None:
        base += "_" + _script_braces(sub, compact)
    sup = n.children.get(Relation.SUPER)
    if sup is not None:
        base += "^" + _script_braces(sup, compact)

    if Relation.ABOVE in n.children and Relation.ABOVE not in consumed:
        base = f"\\overset{{{_emit_chain(n.children[Relation.ABOVE], compact)}}}{{{base}}}"
    if Relation.BELOW in n.children and Relation.BELOW not in consumed:
        base = f"\\underset{{{_emit_chain(n.children[Relation.BELOW], compact)}}}{{{base}}}"
    if Relation.WITHIN in n.children and Relation.WITHIN not in consumed:
        raise ValueError(f"cannot serialize WITHIN child of {n.label!r}")
    return base


def _emit_symbol(label: str) -> str:
    if label == WILDCARD:
        return "?"
    if len(label) == 1:
        if label in "{}&%$#_":
            return "\\" + label
        return label
    if label in COMMAND_SYMBOLS:
        return "\\" + label + " "
    return f"\\text{{{label}}}"


def _script_braces(head: SymbolNode, compact: bool) -> str:
    body = _emit_chain(head, compact)
    if compact and len(body) == 1:
        return body
    return "{" + body + "}"
