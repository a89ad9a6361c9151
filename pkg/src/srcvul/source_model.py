"""Lightweight lexical model of C-like source files.

Parses source text into a three-tier structure (file -> functions ->
variable occurrences with line numbers) without compiling anything.
The parser is a token-level heuristic: good enough to place variable
definitions, uses, pointer assignments and call arguments on the right
physical lines, which is all the slicer needs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


DEFINITION = "definition"
USE = "use"
POINTER_ASSIGNMENT = "pointer-assignment"
CALL_ARGUMENT = "call-argument"

_KEYWORDS = frozenset(
    {
        "auto", "break", "case", "const", "continue", "default", "do",
        "else", "enum", "extern", "for", "goto", "if", "inline", "register",
        "restrict", "return", "sizeof", "static", "struct", "switch",
        "typedef", "union", "volatile", "while", "namespace", "new",
        "delete", "class", "public", "private", "protected", "template",
        "typename", "using", "operator", "true", "false", "nullptr",
    }
)

_TYPE_KEYWORDS = frozenset(
    {
        "void", "char", "short", "int", "long", "float", "double",
        "signed", "unsigned", "bool", "_Bool", "size_t", "ssize_t",
    }
)

_QUALIFIERS = frozenset(
    {"static", "const", "extern", "register", "volatile", "inline",
     "restrict", "auto", "typedef"}
)

# Upper-case identifiers are treated as macro constants (NULL, GFP_KERNEL,
# S_IFREG, ...), never as variables.
_MACRO_CONST = re.compile(r"^[A-Z][A-Z0-9_]*$")

_ID_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_DIGITS = frozenset("0123456789")

_MULTI_OPS = (
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=",
    "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
)

_ASSIGN_OPS = frozenset(
    {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}
)


class SourceParseError(Exception):
    """Raised when source text cannot be tokenized at all."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class VarOccurrence:
    """One appearance of a variable on a physical source line."""

    name: str
    line: int
    kind: str  # definition | use | pointer-assignment | call-argument
    call_target: str | None = None  # set iff kind == call-argument
    pointee: str | None = None  # set iff kind == pointer-assignment
    arg_pos: int | None = None  # 1-based argument position for call-argument
    indirect: bool = False  # call through a function-pointer variable


@dataclass
class FunctionUnit:
    """A function definition plus everything recorded inside it."""

    name: str
    start_line: int
    end_line: int
    parameters: list[str] = field(default_factory=list)
    variable_occurrences: list[VarOccurrence] = field(default_factory=list)
    # (source_var, dependent_var, line): dependent_var was assigned a value
    # computed from source_var.  Only plain-identifier left-hand sides
    # create edges; member stores like a->f = b do not.
    dvar_edges: list[tuple[str, str, int]] = field(default_factory=list)

    @property
    def module_size(self) -> int:
        return self.end_line - self.start_line + 1


@dataclass
class SourceUnit:
    """Parse result for one file."""

    path: str
    functions: list[FunctionUnit] = field(default_factory=list)
    loc_total: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def function_named(self, name: str) -> FunctionUnit | None:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


@dataclass(frozen=True)
class _Token:
    kind: str  # id | num | str | char | punct
    text: str
    line: int


def _tokenize(text: str, diagnostics: list[str]) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\x00":
            raise SourceParseError("unreadable input (NUL byte)", line)
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r\v\f":
            i += 1
            continue
        if ch == "\\" and i + 1 < n and text[i + 1] == "\n":
            line += 1
            i += 2
            continue
        if ch == "#" and _at_line_start(tokens, text, i):
            i, line = _skip_preprocessor(text, i, line)
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                diagnostics.append(f"line {line}: unterminated block comment")
                line += text.count("\n", i)
                i = n
            else:
                line += text.count("\n", i, j + 2)
                i = j + 2
            continue
        if ch in "\"'":
            i, line = _scan_literal(text, i, line, ch, tokens, diagnostics)
            continue
        if ch in _ID_START:
            j = i + 1
            while j < n and (text[j] in _ID_START or text[j] in _DIGITS):
                j += 1
            tokens.append(_Token("id", text[i:j], line))
            i = j
            continue
        if ch in _DIGITS:
            j = i + 1
            while j < n and (text[j] in _ID_START or text[j] in _DIGITS or text[j] == "."):
                j += 1
            tokens.append(_Token("num", text[i:j], line))
            i = j
            continue
        for op in _MULTI_OPS:
            if text.startswith(op, i):
                tokens.append(_Token("punct", op, line))
                i += len(op)
                break
        else:
            tokens.append(_Token("punct", ch, line))
            i += 1
    return tokens


def _at_line_start(tokens: list[_Token], text: str, i: int) -> bool:
    j = i - 1
    while j >= 0 and text[j] in " \t":
        j -= 1
    return j < 0 or text[j] == "\n"


def _skip_preprocessor(text: str, i: int, line: int) -> tuple[int, int]:
    n = len(text)
    while i < n:
        if text[i] == "\n":
            return i + 1, line + 1
        if text[i] == "\\" and i + 1 < n and text[i + 1] == "\n":
            line += 1
            i += 2
            continue
        i += 1
    return n, line


def _scan_literal(
    text: str,
    i: int,
    line: int,
    quote: str,
    tokens: list[_Token],
    diagnostics: list[str],
) -> tuple[int, int]:
    start_line = line
    j = i + 1
    n = len(text)
    while j < n:
        c = text[j]
        if c == "\\":
            j += 2
            continue
        if c == quote:
            tokens.append(_Token("str" if quote == '"' else "char", text[i : j + 1], start_line))
            return j + 1, line
        if c == "\n":
            diagnostics.append(f"line {start_line}: unterminated literal")
            tokens.append(_Token("str" if quote == '"' else "char", text[i:j], start_line))
            return j + 1, line + 1
        j += 1
    diagnostics.append(f"line {start_line}: unterminated literal")
    tokens.append(_Token("str", text[i:], start_line))
    return n, line


def _count_loc(text: str) -> int:
    """Non-blank, non-comment physical lines (the cloc convention)."""
    count = 0
    in_block = False
    for raw in text.splitlines():
        stripped = raw.strip()
        code = []
        i = 0
        while i < len(stripped):
            if in_block:
                j = stripped.find("*/", i)
                if j < 0:
                    i = len(stripped)
                else:
                    in_block = False
                    i = j + 2
                continue
            if stripped.startswith("//", i):
                break
            if stripped.startswith("/*", i):
                in_block = True
                i += 2
                continue
            code.append(stripped[i])
            i += 1
        if "".join(code).strip():
            count += 1
    return count


class _FunctionScanner:
    """Extracts occurrences from one function body."""

    def __init__(self, fn: FunctionUnit):
        self.fn = fn
        self.pointer_vars: set[str] = set()
        self.declared_vars: set[str] = set(fn.parameters)
        self._seen_occs: set[VarOccurrence] = set()
        self._seen_edges: set[tuple[str, str, int]] = set()

    def add(self, occ: VarOccurrence) -> None:
        if occ not in self._seen_occs:
            self._seen_occs.add(occ)
            self.fn.variable_occurrences.append(occ)

    def add_edge(self, source: str, target: str, line: int) -> None:
        edge = (source, target, line)
        if edge not in self._seen_edges:
            self._seen_edges.add(edge)
            self.fn.dvar_edges.append(edge)

    # -- statement dispatch -------------------------------------------------

    def scan_unit(self, toks: list[_Token]) -> None:
        # iterative so `if (a) if (b) if (c) ...` cannot exhaust the stack
        while True:
            toks = _strip_outer_parens(toks)
            if not toks:
                return
            head = toks[0]
            if head.kind == "id" and len(toks) == 2 and toks[1].text == ":":
                return  # label
            if head.text in ("if", "while", "switch"):
                if len(toks) >= 2 and toks[1].text == "(":
                    close = _match_paren(toks, 1)
                    self.scan_expr_statement(toks[2:close])
                    toks = toks[close + 1 :]
                    continue
                return
            if head.text == "for":
                if len(toks) >= 2 and toks[1].text == "(":
                    close = _match_paren(toks, 1)
                    for part in _split_top(toks[2:close], ";"):
                        self.scan_unit(part)
                    toks = toks[close + 1 :]
                    continue
                return
            if head.text in ("return", "case"):
                self.scan_expr_statement(toks[1:])
                return
            if head.text in ("else", "do"):
                toks = toks[1:]
                continue
            if head.text in ("break", "continue", "goto", "default", "typedef"):
                return
            if self._try_declaration(toks):
                return
            self.scan_expr_statement(toks)
            return

    # -- declarations -------------------------------------------------------

    def _try_declaration(self, toks: list[_Token]) -> bool:
        pos = 0
        n = len(toks)
        saw_keyword_type = False
        while pos < n and toks[pos].text in _QUALIFIERS:
            pos += 1
        if pos < n and toks[pos].text in ("struct", "union", "enum"):
            pos += 1
            if pos < n and toks[pos].kind == "id":
                pos += 1
                saw_keyword_type = True
        elif pos < n and toks[pos].text in _TYPE_KEYWORDS:
            while pos < n and toks[pos].text in _TYPE_KEYWORDS:
                pos += 1
            saw_keyword_type = True
        elif pos < n and toks[pos].kind == "id" and not _is_identifier_like_value(toks[pos]):
            # tentative user type name; require a declarator right after
            nxt = pos + 1
            if nxt < n and (toks[nxt].text == "*" or toks[nxt].kind == "id"):
                pos += 1
            else:
                return False
        else:
            return False

        declarators = _split_top(toks[pos:], ",")
        if not declarators or not declarators[0]:
            return False
        parsed: list[tuple[_Token, bool, list[_Token]]] = []
        for decl in declarators:
            item = self._parse_declarator(decl)
            if item is None:
                return False
            parsed.append(item)
        for name_tok, is_ptr, init in parsed:
            self.declared_vars.add(name_tok.text)
            if is_ptr:
                self.pointer_vars.add(name_tok.text)
            if init:
                self._scan_assignment_rhs(name_tok, init, plain_lhs=True, is_ptr_decl=is_ptr)
            else:
                self.add(VarOccurrence(name_tok.text, name_tok.line, DEFINITION))
        return True

    def _parse_declarator(
        self, decl: list[_Token]
    ) -> tuple[_Token, bool, list[_Token]] | None:
        pos = 0
        n = len(decl)
        is_ptr = False
        while pos < n and decl[pos].text == "*":
            is_ptr = True
            pos += 1
        if pos >= n or decl[pos].kind != "id" or decl[pos].text in _KEYWORDS:
            return None
        name_tok = decl[pos]
        pos += 1
        while pos < n and decl[pos].text == "[":
            close = _match_bracket(decl, pos)
            self.scan_expr(decl[pos + 1 : close])
            pos = close + 1
        if pos < n and decl[pos].text == "=":
            return name_tok, is_ptr, decl[pos + 1 :]
        if pos < n:
            return None  # trailing junk: function prototype, expression, ...
        return name_tok, is_ptr, []

    # -- assignments and expressions -----------------------------------------

    def scan_expr_statement(self, toks: list[_Token]) -> None:
        toks = _strip_outer_parens(toks)
        if not toks:
            return
        idx = _find_top_assign(toks)
        if idx is None:
            self.scan_expr(toks)
            return
        lhs, op, rhs = toks[:idx], toks[idx], toks[idx + 1 :]
        base = self._lhs_base(lhs)
        if base is None:
            self.scan_expr(toks)
            return
        base_tok, plain = base
        if op.text != "=":
            self.add(VarOccurrence(base_tok.text, base_tok.line, USE))
        self._scan_assignment_rhs(base_tok, rhs, plain_lhs=plain)

    def _scan_assignment_rhs(
        self,
        target: _Token,
        rhs: list[_Token],
        plain_lhs: bool,
        is_ptr_decl: bool = False,
    ) -> None:
        # unwind `a = b = c = expr` chains iteratively; each link records its
        # target plus the occurrence-list mark where its dependencies begin
        chain: list[tuple[_Token, bool, int]] = []
        tail: list[_Token] | None = rhs
        while True:
            assert tail is not None
            tail = _strip_outer_parens(tail)
            pointee = self._pointer_rhs(tail) if plain_lhs else None
            if pointee is not None:
                self.pointer_vars.add(target.text)
                self.add(
                    VarOccurrence(
                        target.text, target.line, POINTER_ASSIGNMENT, pointee=pointee.text
                    )
                )
                self.add(VarOccurrence(pointee.text, pointee.line, USE))
                tail = None  # the pointer form consumes the rest of the chain
                break
            if is_ptr_decl:
                self.pointer_vars.add(target.text)
                is_ptr_decl = False
            self.add(VarOccurrence(target.text, target.line, DEFINITION))
            chain.append((target, plain_lhs, len(self.fn.variable_occurrences)))
            idx = _find_top_assign(tail)
            if idx is None:
                break
            lhs, op, rest = tail[:idx], tail[idx], tail[idx + 1 :]
            base = self._lhs_base(lhs)
            if base is None:
                break  # remainder is a plain expression
            target, plain_lhs = base
            if op.text != "=":
                self.add(VarOccurrence(target.text, target.line, USE))
            tail = rest
        if tail:
            self.scan_expr(tail)
        for tok, plain, mark in chain:
            if not plain:
                continue
            for occ in self.fn.variable_occurrences[mark:]:
                if occ.name != tok.text:
                    self.add_edge(occ.name, tok.text, tok.line)

    def _pointer_rhs(self, rhs: list[_Token]) -> _Token | None:
        """Recognize `&x` / `&x->f` / bare pointer `q` right-hand sides."""
        rhs = _strip_outer_parens(rhs)
        if not rhs:
            return None
        if rhs[0].text == "&" and len(rhs) >= 2 and rhs[1].kind == "id":
            tok = rhs[1]
            if tok.text in _KEYWORDS or _MACRO_CONST.match(tok.text):
                return None
            rest = rhs[2:]
            while len(rest) >= 2 and rest[0].text in ("->", ".") and rest[1].kind == "id":
                rest = rest[2:]
            return tok if not rest else None
        if len(rhs) == 1 and rhs[0].kind == "id" and rhs[0].text in self.pointer_vars:
            return rhs[0]
        return None

    def _lhs_base(self, lhs: list[_Token]) -> tuple[_Token, bool] | None:
        pos = 0
        n = len(lhs)
        derefed = False
        while pos < n and lhs[pos].text in ("*", "("):
            derefed = derefed or lhs[pos].text == "*"
            pos += 1
        if pos >= n or lhs[pos].kind != "id" or lhs[pos].text in _KEYWORDS:
            return None
        base = lhs[pos]
        if _MACRO_CONST.match(base.text):
            return None
        trailing = lhs[pos + 1 :]
        plain = not derefed
        for i, t in enumerate(trailing):
            if t.text in ("->", ".", "["):
                plain = False
            if t.text == "[":
                close = _match_bracket(trailing, i)
                self.scan_expr(trailing[i + 1 : close])
        return base, plain

    def scan_expr(self, toks: list[_Token]) -> None:
        paren_stack: list[dict | None] = []  # call context per open paren
        i = 0
        n = len(toks)
        while i < n:
            tok = toks[i]
            if tok.text == "(":
                ctx = None
                prev = toks[i - 1] if i > 0 else None
                if prev is not None and prev.kind == "id" and prev.text not in _KEYWORDS:
                    indirect = prev.text in self.declared_vars or (
                        i >= 2 and toks[i - 2].text in ("->", ".")
                    )
                    ctx = {"name": prev.text, "pos": 1, "indirect": indirect}
                paren_stack.append(ctx)
                i += 1
                continue
            if tok.text == ")":
                if paren_stack:
                    paren_stack.pop()
                i += 1
                continue
            if tok.text == "," and paren_stack and paren_stack[-1] is not None:
                paren_stack[-1]["pos"] += 1
                i += 1
                continue
            if tok.kind == "id":
                nxt = toks[i + 1] if i + 1 < n else None
                prev = toks[i - 1] if i > 0 else None
                if tok.text in _KEYWORDS or tok.text in _TYPE_KEYWORDS:
                    i += 1
                    continue
                if prev is not None and prev.text in ("->", ".", "struct", "union", "enum"):
                    i += 1
                    continue
                if nxt is not None and nxt.text == "(":
                    i += 1
                    continue  # call target, handled at '('
                if _MACRO_CONST.match(tok.text):
                    i += 1
                    continue
                call = next((c for c in reversed(paren_stack) if c is not None), None)
                if call is not None:
                    self.add(
                        VarOccurrence(
                            tok.text,
                            tok.line,
                            CALL_ARGUMENT,
                            call_target=call["name"],
                            arg_pos=call["pos"],
                            indirect=call["indirect"],
                        )
                    )
                else:
                    self.add(VarOccurrence(tok.text, tok.line, USE))
                if (nxt is not None and nxt.text in ("++", "--")) or (
                    prev is not None and prev.text in ("++", "--")
                ):
                    self.add(VarOccurrence(tok.text, tok.line, DEFINITION))
            i += 1


def _strip_outer_parens(toks: list[_Token]) -> list[_Token]:
    while len(toks) >= 2 and toks[0].text == "(" and _match_paren(toks, 0) == len(toks) - 1:
        toks = toks[1:-1]
    return toks


def _match_paren(toks: list[_Token], open_idx: int) -> int:
    depth = 0
    for i in range(open_idx, len(toks)):
        if toks[i].text == "(":
            depth += 1
        elif toks[i].text == ")":
            depth -= 1
            if depth == 0:
                return i
    return len(toks) - 1


def _match_bracket(toks: list[_Token], open_idx: int) -> int:
    depth = 0
    for i in range(open_idx, len(toks)):
        if toks[i].text == "[":
            depth += 1
        elif toks[i].text == "]":
            depth -= 1
            if depth == 0:
                return i
    return len(toks) - 1


def _split_top(toks: list[_Token], sep: str) -> list[list[_Token]]:
    parts: list[list[_Token]] = []
    depth = 0
    cur: list[_Token] = []
    for t in toks:
        if t.text in ("(", "["):
            depth += 1
        elif t.text in (")", "]"):
            depth -= 1
        if t.text == sep and depth == 0:
            parts.append(cur)
            cur = []
        else:
            cur.append(t)
    if cur:
        parts.append(cur)
    return parts


def _find_top_assign(toks: list[_Token]) -> int | None:
    depth = 0
    for i, t in enumerate(toks):
        if t.text in ("(", "["):
            depth += 1
        elif t.text in (")", "]"):
            depth -= 1
        elif depth == 0 and t.kind == "punct" and t.text in _ASSIGN_OPS:
            return i
    return None


def _is_identifier_like_value(tok: _Token) -> bool:
    return tok.text in _KEYWORDS or _MACRO_CONST.match(tok.text) is not None


def _parse_parameters(toks: list[_Token]) -> list[tuple[str, int, bool]]:
    """Return (name, line, is_pointer) per parameter."""
    out: list[tuple[str, int, bool]] = []
    for part in _split_top(toks, ","):
        meaningful = [t for t in part if t.text not in ("void",)]
        if not meaningful or all(t.text == "..." for t in meaningful):
            continue
        candidates = []
        for pos, t in enumerate(part):
            if t.kind != "id" or t.text in _KEYWORDS or t.text in _TYPE_KEYWORDS:
                continue
            if pos > 0 and part[pos - 1].text in ("struct", "union", "enum"):
                continue  # type name, not the parameter
            candidates.append(t)
        if not candidates:
            continue
        name_tok = candidates[-1]
        is_ptr = any(t.text == "*" for t in part)
        out.append((name_tok.text, name_tok.line, is_ptr))
    return out


def parse_source(text: str, path: str = "<memory>") -> SourceUnit:
    """Parse C-like source text into a SourceUnit.

    Never raises on unbalanced input; recoveries are reported through
    ``SourceUnit.diagnostics``.  NUL bytes raise :class:`SourceParseError`.
    """
    unit = SourceUnit(path=path, loc_total=_count_loc(text))
    tokens = _tokenize(text, unit.diagnostics)
    n = len(tokens)
    i = 0
    run_start = 0  # first token of the current top-level run
    while i < n:
        tok = tokens[i]
        if tok.text == ";":
            run_start = i + 1
            i += 1
            continue
        if tok.text == "{":
            run = tokens[run_start:i]
            fn_head = _function_header(run)
            if fn_head is not None:
                name_tok, param_open, param_close = fn_head
                close = _skip_braces(tokens, i)
                if close >= n:
                    unit.diagnostics.append(
                        f"line {tok.line}: unbalanced braces in {name_tok.text}; "
                        "recovered at end of file"
                    )
                    close = n - 1
                fn = FunctionUnit(
                    name=name_tok.text,
                    start_line=run[0].line,
                    end_line=tokens[close].line,
                )
                params = _parse_parameters(tokens[run_start + param_open + 1 : run_start + param_close])
                scanner = _FunctionScanner(fn)
                for pname, pline, pptr in params:
                    fn.parameters.append(pname)
                    scanner.declared_vars.add(pname)
                    if pptr:
                        scanner.pointer_vars.add(pname)
                    scanner.add(VarOccurrence(pname, pline, DEFINITION))
                _scan_body(tokens[i + 1 : close], scanner)
                unit.functions.append(fn)
                i = close + 1
                run_start = i
                continue
            if _is_transparent_block(run):
                run_start = i + 1
                i += 1
                continue
            i = _skip_braces(tokens, i) + 1
            run_start = i
            continue
        if tok.text == "}":
            run_start = i + 1
            i += 1
            continue
        i += 1
    unit.functions.sort(key=lambda f: f.start_line)
    _flag_use_before_def(unit)
    return unit


def read_source(path: str) -> SourceUnit:
    """Read and parse a file; undecodable bytes are replaced, never fatal."""
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8", errors="replace")
    return parse_source(text, path=str(path))


def _function_header(run: list[_Token]) -> tuple[_Token, int, int] | None:
    """Match `... name ( params )` at the end of a top-level run."""
    if not run or run[-1].text != ")":
        return None
    depth = 0
    open_idx = None
    for i in range(len(run) - 1, -1, -1):
        t = run[i]
        if t.text == ")":
            depth += 1
        elif t.text == "(":
            depth -= 1
            if depth == 0:
                open_idx = i
                break
    if open_idx is None or open_idx == 0:
        return None
    name_tok = run[open_idx - 1]
    if name_tok.kind != "id" or name_tok.text in _KEYWORDS:
        return None
    for t in run[:open_idx]:
        if t.text == "=":
            return None
    return name_tok, open_idx, len(run) - 1


def _is_transparent_block(run: list[_Token]) -> bool:
    texts = [t.text for t in run]
    if texts[:1] == ["extern"] and len(run) == 2 and run[1].kind == "str":
        return True
    if texts[:1] == ["namespace"]:
        return True
    return False


def _skip_braces(tokens: list[_Token], open_idx: int) -> int:
    depth = 0
    for i in range(open_idx, len(tokens)):
        if tokens[i].text == "{":
            depth += 1
        elif tokens[i].text == "}":
            depth -= 1
            if depth == 0:
                return i
    return len(tokens)


def _scan_body(body: list[_Token], scanner: _FunctionScanner) -> None:
    unit: list[_Token] = []
    depth = 0
    for t in body:
        if t.text in ("(", "["):
            depth += 1
        elif t.text in (")", "]"):
            depth -= 1
        if t.text in ("{", "}") or (t.text == ";" and depth == 0):
            scanner.scan_unit(unit)
            unit = []
        else:
            unit.append(t)
    scanner.scan_unit(unit)


def _flag_use_before_def(unit: SourceUnit) -> None:
    for fn in unit.functions:
        first_def: dict[str, int] = {}
        first_use: dict[str, int] = {}
        for occ in fn.variable_occurrences:
            if occ.kind in (DEFINITION, POINTER_ASSIGNMENT):
                first_def.setdefault(occ.name, occ.line)
                if occ.line < first_def[occ.name]:
                    first_def[occ.name] = occ.line
            else:
                first_use.setdefault(occ.name, occ.line)
                if occ.line < first_use[occ.name]:
                    first_use[occ.name] = occ.line
        for name, use_line in sorted(first_use.items()):
            if name not in first_def:
                unit.diagnostics.append(
                    f"{fn.name}: {name} used at line {use_line} without a definition"
                )
            elif use_line < first_def[name]:
                unit.diagnostics.append(
                    f"{fn.name}: {name} used at line {use_line} before definition "
                    f"at line {first_def[name]}"
                )
