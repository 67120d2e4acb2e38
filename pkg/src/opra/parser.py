"""Lexer and recursive-descent parser for query files.

A query file is UTF-8 text with `#` line comments: optional `def`
regex macros, an optional LET ontology, and one MATCH query.

    def route(p) = <E(@1, @1') = 1>* <T>
    LET t_walk(x) := (type(x) = 4) * time(x) IN
    MATCH NODES (s, t)
    SUCH THAT s -pi-> t
    WHERE route(pi)
    HAVING t_walk[pi] <= 10

The parser reduces all sugar to the core AST in query.py:

  * `>=`, `>`, `!=` in node constraints become the core {<=, <, =}
    (inequality becomes a union of two letters); `<T>` becomes `<0 = 0>`.
  * boolean connectives and comparisons in terms become fundamental-
    function applications over the 0/1 arithmetization.
  * general terms inside HAVING become auxiliary labellings applied to
    fresh length-1 paths, leaving only linear constraints behind.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import QuerySyntaxError
from .query import (
    AGGREGATE_FUNCS, EPSILON, TRUE_CONSTRAINT,
    AggTerm, ApplyTerm, ArithConstraint, ArithTerm, ConstAtom, ConstTerm,
    Concat, IndicatorTerm, LabelAtom, LabelTerm, Letter, MaxPathTerm,
    MinPathTerm, NodeConstraint, NodeRef, OntologyEntry, OpraQuery,
    PathConstraint, PosVar, PraQuery, Regex, RegularConstraint, star,
    Term, Union_, VarEqTerm,
)

KEYWORDS = {
    "LET", "IN", "MATCH", "NODES", "PATHS", "SUCH", "THAT", "WHERE",
    "HAVING", "AND", "def", "min", "max", "agg", "eps",
}

_TWO_CHAR = (":=", "->", "<=", ">=", "!=", "&&", "||", "=>")
_ONE_CHAR = "()[]{}<>,:=*+-.!"


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, string, posvar, op, kw, eof
    value: object
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)

    def err(msg: str):
        raise QuerySyntaxError(msg, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token("op", two, line, start_col))
            i += 2
            col += 2
            continue
        if c == "@":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                err("expected digits after '@'")
            primed = j < n and text[j] == "'"
            idx = int(text[i + 1:j])
            if primed:
                j += 1
            tokens.append(Token("posvar", PosVar(idx, primed), line, start_col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                err("unterminated string literal")
            tokens.append(Token("string", text[i + 1:j], line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", int(text[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if c in _ONE_CHAR:
            tokens.append(Token("op", c, line, start_col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {c!r}")
    tokens.append(Token("eof", None, line, col))
    return tokens


class _VarRef:
    """Parser-internal marker for a bare node-variable reference."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


_REGEX_START = {"<", "(", }  # plus the 'eps' keyword


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.macros: Dict[str, Tuple[int, Regex]] = {}
        self._aux_n = 0
        # entries synthesized by HAVING-term desugaring, flushed in order
        self._pending_entries: List[OntologyEntry] = []

    # -- token plumbing ---------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise QuerySyntaxError(msg, tok.line, tok.col)

    def at_op(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.value == value

    def at_kw(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.value == value

    def expect_op(self, value: str) -> Token:
        if not self.at_op(value):
            self.error(f"expected {value!r}")
        return self.next()

    def expect_kw(self, value: str) -> Token:
        if not self.at_kw(value):
            self.error(f"expected keyword {value}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t.kind != "ident":
            self.error(f"expected {what}")
        return self.next().value

    # -- entry point ------------------------------------------------------

    def parse_file(self) -> OpraQuery:
        if self.peek().kind == "eof":
            self.error("empty query")
        while self.at_kw("def"):
            self.parse_def()
        user_entries: List[OntologyEntry] = []
        if self.at_kw("LET"):
            self.next()
            while True:
                name = self.expect_ident("labelling name")
                self.expect_op("(")
                params = self.parse_ident_list()
                self.expect_op(")")
                self.expect_op(":=")
                term = self.parse_term()
                # terms synthesized while parsing this entry precede it
                user_entries.extend(self._pending_entries)
                self._pending_entries = []
                user_entries.append(OntologyEntry(name, tuple(params), term))
                if self.at_op(","):
                    self.next()
                    continue
                break
            self.expect_kw("IN")
        query = self.parse_pra()
        entries = user_entries + self._pending_entries
        self._pending_entries = []
        if self.peek().kind != "eof":
            self.error("trailing input after query")
        return OpraQuery(tuple(entries), query)

    def parse_def(self) -> None:
        self.expect_kw("def")
        name = self.expect_ident("macro name")
        if name in self.macros:
            self.error(f"macro {name!r} defined twice")
        self.expect_op("(")
        params = self.parse_ident_list()
        self.expect_op(")")
        self.expect_op("=")
        body = self.parse_regex()
        self.macros[name] = (len(params), body)

    def parse_ident_list(self) -> List[str]:
        names: List[str] = []
        if self.peek().kind == "ident":
            names.append(self.next().value)
            while self.at_op(","):
                self.next()
                names.append(self.expect_ident())
        return names

    # -- PRA queries ------------------------------------------------------

    def parse_pra(self) -> PraQuery:
        self.expect_kw("MATCH")
        match_nodes: Tuple[str, ...] = ()
        match_paths: Tuple[str, ...] = ()
        seen_any = False
        while self.at_kw("NODES") or self.at_kw("PATHS"):
            kw = self.next().value
            self.expect_op("(")
            names = tuple(self.parse_ident_list())
            self.expect_op(")")
            if kw == "NODES":
                match_nodes = names
            else:
                match_paths = names
            seen_any = True
            if self.at_op(",") and self.peek(1).kind == "kw" \
                    and self.peek(1).value in ("NODES", "PATHS"):
                self.next()
                continue
            break
        if not seen_any:
            self.error("expected NODES or PATHS after MATCH")

        path_constraints: List[PathConstraint] = []
        regular_constraints: List[RegularConstraint] = []
        extra: List[ArithConstraint] = []

        if self.at_kw("SUCH"):
            self.next()
            self.expect_kw("THAT")
            while True:
                path_constraints.append(self.parse_path_constraint())
                if self.at_kw("AND"):
                    self.next()
                    continue
                break
        if self.at_kw("WHERE"):
            self.next()
            while True:
                regular_constraints.append(self.parse_regular_application())
                if self.at_kw("AND"):
                    self.next()
                    continue
                break
        arith: List[ArithConstraint] = []
        if self.at_kw("HAVING"):
            self.next()
            while True:
                arith.extend(
                    self.parse_having_comparison(path_constraints,
                                                 regular_constraints)
                )
                if self.at_kw("AND"):
                    self.next()
                    continue
                break
        return PraQuery(
            match_nodes, match_paths,
            tuple(path_constraints), tuple(regular_constraints), tuple(arith),
        )

    def parse_node_ref(self) -> NodeRef:
        t = self.peek()
        if t.kind == "string":
            return NodeRef(self.next().value, literal=True)
        if t.kind == "posvar":
            # kept so validation can reject it with the dedicated error
            return NodeRef(self.next().value.text(), literal=False)
        return NodeRef(self.expect_ident("node variable"))

    def parse_path_constraint(self) -> PathConstraint:
        source = self.parse_node_ref()
        self.expect_op("-")
        path_var = self.expect_ident("path variable")
        self.expect_op("->")
        target = self.parse_node_ref()
        return PathConstraint(source, path_var, target)

    # -- regular constraints ----------------------------------------------

    def parse_regular_application(self) -> RegularConstraint:
        t = self.peek()
        if t.kind == "ident" and self.peek(1).kind == "op" \
                and self.peek(1).value == "(":
            name = self.next().value
            if name not in self.macros:
                self.error(f"unknown regex macro {name!r}", t)
            arity, body = self.macros[name]
            self.expect_op("(")
            args = self.parse_ident_list()
            self.expect_op(")")
            if len(args) != arity:
                self.error(
                    f"macro {name!r} takes {arity} path(s), got {len(args)}", t
                )
            return RegularConstraint(body, tuple(args))
        regex = self.parse_regex()
        self.expect_op("(")
        args = self.parse_ident_list()
        self.expect_op(")")
        if not args:
            self.error("regular constraint needs at least one path variable")
        return RegularConstraint(regex, tuple(args))

    def _starts_regex_primary(self) -> bool:
        t = self.peek()
        if t.kind == "kw" and t.value == "eps":
            return True
        if t.kind != "op":
            return False
        if t.value == "<":
            return True
        if t.value == "(":
            # '(' starts a grouped regex only if a regex follows; otherwise
            # it is the path-variable list of an application
            nxt = self.peek(1)
            return (nxt.kind == "kw" and nxt.value == "eps") or (
                nxt.kind == "op" and nxt.value in _REGEX_START
            )
        return False

    def parse_regex(self) -> Regex:
        left = self.parse_concat()
        while self.at_op("+"):
            self.next()
            left = Union_(left, self.parse_concat())
        return left

    def parse_concat(self) -> Regex:
        left = self.parse_postfix()
        while True:
            if self.at_op("."):
                self.next()
                left = Concat(left, self.parse_postfix())
            elif self._starts_regex_primary():
                left = Concat(left, self.parse_postfix())
            else:
                return left

    def parse_postfix(self) -> Regex:
        r = self.parse_regex_primary()
        while self.at_op("*"):
            self.next()
            r = star(r)
        return r

    def parse_regex_primary(self) -> Regex:
        if self.at_kw("eps"):
            self.next()
            return EPSILON
        if self.at_op("("):
            self.next()
            r = self.parse_regex()
            self.expect_op(")")
            return r
        if self.at_op("<"):
            return self.parse_letter()
        self.error("expected a node constraint, '(', or 'eps'")

    def parse_letter(self) -> Regex:
        self.expect_op("<")
        if self.peek().kind == "ident" and self.peek().value == "T" \
                and self.peek(1).kind == "op" and self.peek(1).value == ">":
            self.next()
            self.next()
            return Letter(TRUE_CONSTRAINT)
        lhs = self.parse_nc_atom()
        op_tok = self.peek()
        if not (op_tok.kind == "op" and op_tok.value in
                ("<=", "<", "=", ">=", ">", "!=")):
            self.error("expected a comparison operator")
        op = self.next().value
        rhs = self.parse_nc_atom()
        self.expect_op(">")
        if op == ">=":
            lhs, rhs, op = rhs, lhs, "<="
        elif op == ">":
            lhs, rhs, op = rhs, lhs, "<"
        if op == "!=":
            return Union_(
                Letter(NodeConstraint(lhs, "<", rhs)),
                Letter(NodeConstraint(rhs, "<", lhs)),
            )
        return Letter(NodeConstraint(lhs, op, rhs))

    def parse_nc_atom(self):
        t = self.peek()
        if t.kind == "int":
            return ConstAtom(self.next().value)
        if t.kind == "op" and t.value == "-":
            self.next()
            tok = self.peek()
            if tok.kind != "int":
                self.error("expected an integer after '-'")
            return ConstAtom(-self.next().value)
        if t.kind == "ident":
            name = self.next().value
            self.expect_op("(")
            args: List[PosVar] = []
            while True:
                tok = self.peek()
                if tok.kind != "posvar":
                    self.error("expected a position variable (@i or @i')")
                args.append(self.next().value)
                if self.at_op(","):
                    self.next()
                    continue
                break
            self.expect_op(")")
            return LabelAtom(name, tuple(args))
        self.error("expected an integer or a labelling application")

    # -- HAVING clauses -----------------------------------------------------

    def parse_having_comparison(
        self,
        path_constraints: List[PathConstraint],
        regular_constraints: List[RegularConstraint],
    ) -> List[ArithConstraint]:
        lhs = self.parse_having_expr()
        op_tok = self.peek()
        if not (op_tok.kind == "op" and op_tok.value in
                ("<=", "<", "=", ">=", ">")):
            self.error("expected a comparison in HAVING")
        op = self.next().value
        rhs = self.parse_having_expr()

        def materialize(side):
            # turn each general term item into an auxiliary labelling
            # applied to length-1 paths pinned to the term's node variables
            items, const = side
            out = []
            for coeff, kind, payload in items:
                if kind == "agg":
                    name, vars_ = payload
                    out.append((coeff, name, vars_))
                else:
                    term = payload
                    out.append(
                        (coeff, *self._auxiliary_for_term(
                            term, path_constraints, regular_constraints))
                    )
            return out, const

        # normalized form: sum(lhs) - sum(rhs) <= rhs_const - lhs_const
        l_items, l_const = materialize(lhs)
        r_items, r_const = materialize(rhs)

        def combine(pos_items, neg_items, bound):
            coeffs: Dict[Tuple[str, Tuple[str, ...]], int] = {}
            for coeff, name, vars_ in pos_items:
                coeffs[(name, vars_)] = coeffs.get((name, vars_), 0) + coeff
            for coeff, name, vars_ in neg_items:
                coeffs[(name, vars_)] = coeffs.get((name, vars_), 0) - coeff
            terms = tuple(
                ArithTerm(c, name, vars_)
                for (name, vars_), c in coeffs.items() if c != 0
            )
            return ArithConstraint(terms, bound)

        out: List[ArithConstraint] = []
        if op in ("<=", "<", "="):
            bound = r_const - l_const - (1 if op == "<" else 0)
            out.append(combine(l_items, r_items, bound))
        if op in (">=", ">", "="):
            bound = l_const - r_const - (1 if op == ">" else 0)
            out.append(combine(r_items, l_items, bound))
        return out

    def parse_having_expr(self):
        """Linear expression: list of (coeff, kind, payload) plus a constant."""
        items: List[tuple] = []
        const = 0
        sign = 1
        if self.at_op("-"):
            self.next()
            sign = -1
        while True:
            c, item = self.parse_having_item(sign)
            if item is None:
                const += c
            else:
                items.append(item)
            if self.at_op("+"):
                self.next()
                sign = 1
            elif self.at_op("-"):
                self.next()
                sign = -1
            else:
                return items, const

    def parse_having_item(self, sign: int):
        t = self.peek()
        if t.kind == "int":
            value = self.next().value
            if self.at_op("*"):
                self.next()
                coeff, item = self.parse_having_item(sign * value)
                if item is None:
                    self.error("expected an aggregate or term after '*'")
                return coeff, item
            return sign * value, None
        if t.kind == "ident" and self.peek(1).kind == "op" \
                and self.peek(1).value == "[":
            name = self.next().value
            self.expect_op("[")
            vars_ = self.parse_ident_list()
            if not vars_:
                self.error("aggregate needs at least one path variable")
            self.expect_op("]")
            return 0, (sign, "agg", (name, tuple(vars_)))
        # comparisons bind at the HAVING level, so terms here parse at the
        # additive level; parenthesize to use a full term
        term = self._as_value(self._parse_term_add())
        return 0, (sign, "term", term)

    def _auxiliary_for_term(self, term, path_constraints, regular_constraints):
        """Define `_auxN := term` and aggregate it over fresh length-1 paths."""
        from .query import term_free_vars
        params = term_free_vars(term)
        if not params:
            # variable-free term: give it one unused existential parameter
            params = (f"_any{self._aux_n}",)
        name = f"_aux{self._aux_n}"
        self._aux_n += 1
        self._pending_entries.append(OntologyEntry(name, params, term))
        aux_paths = []
        for v in params:
            pv = f"_len1_{v}"
            aux_paths.append(pv)
            if any(pc.path_var == pv for pc in path_constraints):
                continue
            path_constraints.append(
                PathConstraint(NodeRef(v), pv, NodeRef(v))
            )
            regular_constraints.append(
                RegularConstraint(Letter(TRUE_CONSTRAINT), (pv,))
            )
        return name, tuple(aux_paths)

    # -- terms ---------------------------------------------------------------

    def parse_term(self) -> Term:
        t = self._parse_term_impl()
        if isinstance(t, _VarRef):
            self.error(f"node variable {t.name!r} used as a value")
        return t

    def _parse_term_impl(self):
        left = self._parse_term_or()
        if self.at_op("=>"):
            self.next()
            right = self._parse_term_impl()
            left = self._as_value(left)
            right = self._as_value(right)
            return ApplyTerm("Max", (ApplyTerm("-", (ConstTerm(1), left)), right))
        return left

    def _parse_term_or(self):
        left = self._parse_term_and()
        while self.at_op("||"):
            self.next()
            right = self._parse_term_and()
            left = ApplyTerm("Max", (self._as_value(left), self._as_value(right)))
        return left

    def _parse_term_and(self):
        left = self._parse_term_cmp()
        while self.at_op("&&"):
            self.next()
            right = self._parse_term_cmp()
            left = ApplyTerm("*", (self._as_value(left), self._as_value(right)))
        return left

    def _parse_term_cmp(self):
        left = self._parse_term_add()
        t = self.peek()
        if not (t.kind == "op" and t.value in ("<=", "<", "=", "!=", ">=", ">")):
            return left
        op = self.next().value
        right = self._parse_term_add()
        if op in ("=", "!="):
            if isinstance(left, _VarRef) and isinstance(right, _VarRef):
                eq: Term = VarEqTerm(left.name, right.name)
            elif isinstance(left, _VarRef) or isinstance(right, _VarRef):
                ref = left if isinstance(left, _VarRef) else right
                self.error(
                    f"node variable {ref.name!r} can only be compared "
                    "with another variable"
                )
            else:
                eq = ApplyTerm("*", (
                    ApplyTerm("<=", (left, right)),
                    ApplyTerm("<=", (right, left)),
                ))
            if op == "!=":
                return ApplyTerm("-", (ConstTerm(1), eq))
            return eq
        left = self._as_value(left)
        right = self._as_value(right)
        if op == "<=":
            return ApplyTerm("<=", (left, right))
        if op == ">=":
            return ApplyTerm("<=", (right, left))
        if op == "<":
            return ApplyTerm("-", (ConstTerm(1), ApplyTerm("<=", (right, left))))
        return ApplyTerm("-", (ConstTerm(1), ApplyTerm("<=", (left, right))))

    def _parse_term_add(self):
        left = self._parse_term_mul()
        while self.at_op("+") or self.at_op("-"):
            op = self.next().value
            right = self._parse_term_mul()
            left = ApplyTerm(op, (self._as_value(left), self._as_value(right)))
        return left

    def _parse_term_mul(self):
        left = self._parse_term_unary()
        while self.at_op("*"):
            self.next()
            right = self._parse_term_unary()
            left = ApplyTerm("*", (self._as_value(left), self._as_value(right)))
        return left

    def _parse_term_unary(self):
        if self.at_op("!"):
            self.next()
            body = self._as_value(self._parse_term_unary())
            return ApplyTerm("-", (ConstTerm(1), body))
        if self.at_op("-"):
            self.next()
            if self.peek().kind == "int":
                return ConstTerm(-self.next().value)
            body = self._as_value(self._parse_term_unary())
            return ApplyTerm("-", (ConstTerm(0), body))
        return self._parse_term_atom()

    def _as_value(self, t):
        if isinstance(t, _VarRef):
            self.error(f"node variable {t.name!r} used as a value")
        return t

    def _parse_term_atom(self):
        t = self.peek()
        if t.kind == "int":
            return ConstTerm(self.next().value)
        if t.kind == "posvar":
            return _VarRef(self.next().value.text())
        if t.kind == "op" and t.value == "(":
            self.next()
            inner = self._parse_term_impl()
            self.expect_op(")")
            return inner
        if t.kind == "op" and t.value == "[":
            self.next()
            query = self.parse_pra()
            self.expect_op("]")
            return IndicatorTerm(query)
        if t.kind == "kw" and t.value in ("min", "max"):
            kw = self.next().value
            self.expect_op("[")
            labelling = self.expect_ident("labelling name")
            self.expect_op(",")
            path_var = self.expect_ident("path variable")
            self.expect_op("]")
            self.expect_op("{")
            query = self.parse_pra()
            self.expect_op("}")
            cls = MinPathTerm if kw == "min" else MaxPathTerm
            return cls(labelling, path_var, query)
        if t.kind == "kw" and t.value == "agg":
            self.next()
            func = self.expect_ident("aggregate function")
            if func not in AGGREGATE_FUNCS:
                self.error(f"{func!r} is not an aggregate function")
            collector = self.expect_ident("collector variable")
            self.expect_op("{")
            value = self.parse_term()
            self.expect_op(":")
            filt = self.parse_term()
            self.expect_op("}")
            return AggTerm(func, collector, value, filt)
        if t.kind == "ident":
            name = self.next().value
            if self.at_op("("):
                self.next()
                if name in AGGREGATE_FUNCS:
                    args: List[Term] = []
                    if not self.at_op(")"):
                        args.append(self.parse_term())
                        while self.at_op(","):
                            self.next()
                            args.append(self.parse_term())
                    self.expect_op(")")
                    return ApplyTerm(name, tuple(args))
                vars_: List[str] = []
                while True:
                    tok = self.peek()
                    if tok.kind == "posvar":
                        vars_.append(self.next().value.text())
                    else:
                        vars_.append(self.expect_ident("node variable"))
                    if self.at_op(","):
                        self.next()
                        continue
                    break
                self.expect_op(")")
                return LabelTerm(name, tuple(vars_))
            return _VarRef(name)
        self.error("expected a term")


def parse(text: str) -> OpraQuery:
    """Parse a query file into the core AST; raises QuerySyntaxError."""
    return Parser(text).parse_file()
