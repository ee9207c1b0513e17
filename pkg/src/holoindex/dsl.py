"""Map-definition language: parser, printer, and germ expansion.

A ``.germ`` file defines one self-map of C^n through components ``f1`` ..
``fn`` over variables ``x1`` .. ``xn``, with ``unity(p, q)`` denoting the
root of unity e^{2*pi*i*p/q}.  Directives carry numeric metadata such as
the jet truncation degree and the working radius.

Grammar (EBNF):

    germfile   = { line } ;
    line       = [ statement ] [ comment ] NEWLINE ;
    comment    = "#" { any character } ;
    statement  = directive | definition { ";" definition } ;
    directive  = "@" IDENT NUMBER ;
    definition = COMPONENT "=" expr ;
    expr       = term { ("+" | "-") term } ;
    term       = unary { "*" unary } ;
    unary      = [ "-" ] power ;
    power      = atom [ "^" INT ] ;
    atom       = NUMBER [ "i" ] | "i" | VAR | UNITY | "(" expr ")" ;
    UNITY      = "unity" "(" INT "," INT ")" ;
    VAR        = "x" INT ;          COMPONENT = "f" INT ;

Three validation error classes exist beyond syntax errors: a variable
index exceeding the number of components (dimension error), and a nonzero
constant term (the maps must fix the origin).  ``print_ast`` emits
canonical text whose reparse is structurally identical, so
parse -> print -> parse is a fixed point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ConstantTermError, DimensionError, ParseError
from .jets import DROP_TOL, Jet, MapGerm
from .spectra import unity_root

CONSTANT_TOL = 1e-12


# -- expression nodes ---------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Unity:
    p: int
    q: int


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class MapSpecAst:
    dimension: int
    components: tuple          # n expression trees
    metadata: tuple            # sorted ((name, value), ...) pairs

    def metadata_dict(self):
        return dict(self.metadata)


# -- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()=,;@])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str      # number | name | op | end
    text: str
    line: int
    column: int


def _tokenize(text):
    tokens = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            match = _TOKEN_RE.match(line, pos)
            if not match:
                raise ParseError(f"unexpected character {line[pos]!r}",
                                 line=line_no, column=pos + 1)
            pos = match.end()
            if match.lastgroup == "ws":
                continue
            kind = match.lastgroup
            tokens.append(_Token(kind, match.group(), line_no, match.start() + 1))
        tokens.append(_Token("newline", "", line_no, len(line) + 1))
    tokens.append(_Token("end", "", len(text.splitlines()) + 1, 1))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind, text=None):
        token = self.peek()
        if token.kind != kind or (text is not None and token.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {token.text!r}",
                             line=token.line, column=token.column)
        return self.advance()

    def skip_newlines(self):
        while self.peek().kind == "newline":
            self.advance()

    # expr := term (("+"|"-") term)*
    def parse_expr(self):
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            right = self.parse_term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    # term := unary ("*" unary)*
    def parse_term(self):
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.advance()
            node = Mul(node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            token = self.expect("number")
            if not token.text.isdigit():
                raise ParseError("exponent must be a nonnegative integer",
                                 line=token.line, column=token.column)
            return Pow(base, int(token.text))
        return base

    def parse_atom(self):
        token = self.peek()
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if self.peek().kind == "name" and self.peek().text == "i":
                self.advance()
                return Num(complex(0.0, value))
            return Num(complex(value, 0.0))
        if token.kind == "name":
            if token.text == "i":
                self.advance()
                return Num(complex(0.0, 1.0))
            if token.text == "unity":
                self.advance()
                self.expect("op", "(")
                p = self._integer()
                self.expect("op", ",")
                q = self._integer()
                self.expect("op", ")")
                if q == 0:
                    raise ParseError("unity denominator must be nonzero",
                                     line=token.line, column=token.column)
                return Unity(p, q)
            var = re.fullmatch(r"x(\d+)", token.text)
            if var:
                self.advance()
                return Var(int(var.group(1)))
            raise ParseError(f"unknown name {token.text!r}",
                             line=token.line, column=token.column)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect("op", ")")
            return node
        raise ParseError(f"expected a value, found {token.text!r}",
                         line=token.line, column=token.column)

    def _integer(self):
        sign = 1
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            sign = -1
        token = self.expect("number")
        if not token.text.isdigit():
            raise ParseError("expected an integer", line=token.line,
                             column=token.column)
        return sign * int(token.text)


def _evaluate_constant(node):
    """Value of the expression with every variable set to zero."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Unity):
        return unity_root(node.p, node.q)
    if isinstance(node, Var):
        return 0.0 + 0.0j
    if isinstance(node, Neg):
        return -_evaluate_constant(node.operand)
    if isinstance(node, Add):
        return _evaluate_constant(node.left) + _evaluate_constant(node.right)
    if isinstance(node, Sub):
        return _evaluate_constant(node.left) - _evaluate_constant(node.right)
    if isinstance(node, Mul):
        return _evaluate_constant(node.left) * _evaluate_constant(node.right)
    if isinstance(node, Pow):
        return _evaluate_constant(node.base) ** node.exponent
    raise TypeError(f"unknown node {node!r}")


def _max_variable(node):
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Neg):
        return _max_variable(node.operand)
    if isinstance(node, (Add, Sub, Mul)):
        return max(_max_variable(node.left), _max_variable(node.right))
    if isinstance(node, Pow):
        return _max_variable(node.base)
    return 0


def parse(text):
    """Parse DSL text into a validated ``MapSpecAst``.

    Raises ``ParseError`` with line/column on syntax problems,
    ``DimensionError`` when a variable index exceeds the component count,
    and ``ConstantTermError`` when a component fails to vanish at zero.
    """
    tokens = _tokenize(text)
    parser = _Parser(tokens)
    definitions = {}
    metadata = {}
    parser.skip_newlines()
    while parser.peek().kind != "end":
        parser.skip_newlines()
        if parser.peek().kind == "end":
            break
        token = parser.peek()
        if token.kind == "op" and token.text == "@":
            parser.advance()
            name = parser.expect("name").text
            sign = 1
            if parser.peek().kind == "op" and parser.peek().text == "-":
                parser.advance()
                sign = -1
            number = parser.expect("number")
            metadata[name] = sign * float(number.text)
        elif token.kind == "name" and re.fullmatch(r"f(\d+)", token.text):
            index = int(token.text[1:])
            parser.advance()
            parser.expect("op", "=")
            expr = parser.parse_expr()
            if index in definitions:
                raise ParseError(f"component f{index} defined twice",
                                 line=token.line, column=token.column)
            definitions[index] = expr
            if parser.peek().kind == "op" and parser.peek().text == ";":
                parser.advance()
                continue
        else:
            raise ParseError(
                f"expected a component definition or directive, found {token.text!r}",
                line=token.line, column=token.column)
        if parser.peek().kind == "newline":
            parser.skip_newlines()
        elif parser.peek().kind == "op" and parser.peek().text == ";":
            parser.advance()
        elif parser.peek().kind != "end":
            bad = parser.peek()
            raise ParseError(f"unexpected {bad.text!r} after statement",
                             line=bad.line, column=bad.column)
    if not definitions:
        raise ParseError("no components defined", line=1, column=1)
    n = len(definitions)
    expected = set(range(1, n + 1))
    if set(definitions) != expected:
        missing = sorted(expected - set(definitions))
        extra = sorted(set(definitions) - expected)
        raise DimensionError(
            f"components must be f1..f{n} with no gaps; "
            f"missing {missing}, unexpected {extra}"
        )
    components = tuple(definitions[i] for i in range(1, n + 1))
    for i, expr in enumerate(components, start=1):
        top = _max_variable(expr)
        if top > n:
            raise DimensionError(
                f"component f{i} uses x{top} but the map has dimension {n}"
            )
        constant = _evaluate_constant(expr)
        if abs(constant) > CONSTANT_TOL:
            raise ConstantTermError(
                f"component f{i} has constant term {constant:.3g}; "
                "maps must fix the origin"
            )
    return MapSpecAst(dimension=n, components=components,
                      metadata=tuple(sorted(metadata.items())))


# -- printer ------------------------------------------------------------------


def _format_number(value):
    """Shortest round-trip decimal for a float."""
    return repr(float(value))


def _print_expr(node, parent_level=0):
    """Render with minimal parentheses; levels: add=1, mul=2, unary=3, pow=4."""
    if isinstance(node, Num):
        re_part, im_part = node.value.real, node.value.imag
        if im_part == 0.0:
            text = _format_number(re_part)
            level = 5
        elif re_part == 0.0:
            text = ("i" if im_part == 1.0 else _format_number(im_part) + "i")
            level = 5
        else:
            sign = "+" if im_part >= 0 else "-"
            text = (f"{_format_number(re_part)} {sign} "
                    f"{_format_number(abs(im_part))}i")
            level = 1
        if text.startswith("-"):
            level = 3
        return text, level
    if isinstance(node, Unity):
        return f"unity({node.p},{node.q})", 5
    if isinstance(node, Var):
        return f"x{node.index}", 5
    if isinstance(node, Neg):
        inner, level = _print_expr(node.operand)
        if level < 3:
            inner = f"({inner})"
        return f"-{inner}", 3
    if isinstance(node, (Add, Sub)):
        op = " + " if isinstance(node, Add) else " - "
        left, l_level = _print_expr(node.left)
        right, r_level = _print_expr(node.right)
        if l_level < 1:
            left = f"({left})"
        # The right operand binds tighter than the surrounding +/-,
        # and a leading unary minus there must be parenthesized.
        if r_level <= 1 or right.startswith("-"):
            right = f"({right})"
        return left + op + right, 1
    if isinstance(node, Mul):
        left, l_level = _print_expr(node.left)
        right, r_level = _print_expr(node.right)
        if l_level < 2:
            left = f"({left})"
        if r_level <= 2 or right.startswith("-"):
            right = f"({right})"
        return f"{left}*{right}", 2
    if isinstance(node, Pow):
        base, level = _print_expr(node.base)
        if level < 5:
            base = f"({base})"
        return f"{base}^{node.exponent}", 4
    raise TypeError(f"unknown node {node!r}")


def print_ast(ast):
    """Canonical text whose reparse is structurally identical."""
    lines = []
    for name, value in ast.metadata:
        if float(value).is_integer():
            lines.append(f"@{name} {int(value)}")
        else:
            lines.append(f"@{name} {_format_number(value)}")
    for i, expr in enumerate(ast.components, start=1):
        text, _ = _print_expr(expr)
        lines.append(f"f{i} = {text}")
    return "\n".join(lines) + "\n"


# -- expansion to jets --------------------------------------------------------


def _expand(node, dim, degree):
    if isinstance(node, Num):
        return Jet.constant(node.value, dim, degree)
    if isinstance(node, Unity):
        return Jet.constant(unity_root(node.p, node.q), dim, degree)
    if isinstance(node, Var):
        return Jet.variable(node.index - 1, dim, degree)
    if isinstance(node, Neg):
        return -_expand(node.operand, dim, degree)
    if isinstance(node, Add):
        return _expand(node.left, dim, degree) + _expand(node.right, dim, degree)
    if isinstance(node, Sub):
        return _expand(node.left, dim, degree) - _expand(node.right, dim, degree)
    if isinstance(node, Mul):
        return _expand(node.left, dim, degree) * _expand(node.right, dim, degree)
    if isinstance(node, Pow):
        return _expand(node.base, dim, degree) ** node.exponent
    raise TypeError(f"unknown node {node!r}")


def to_germ(ast, degree=None):
    """Expand the AST into a ``MapGerm`` at the requested truncation degree.

    The degree defaults to the ``@degree`` directive, then to 7.  Constant
    terms below the validation tolerance (exact-angle cancellations) are
    swept out before germ construction.
    """
    meta = ast.metadata_dict()
    if degree is None:
        degree = int(meta.get("degree", 7))
    dim = ast.dimension
    comps = []
    for expr in ast.components:
        jet = _expand(expr, dim, degree)
        constant = jet.constant_term()
        if abs(constant) > CONSTANT_TOL:
            raise ConstantTermError(
                f"expansion produced constant term {constant:.3g}"
            )
        if abs(constant) > DROP_TOL:
            jet = jet - Jet.constant(constant, dim, degree)
        comps.append(jet)
    return MapGerm(comps)


def working_radius(ast, default=0.5):
    return float(ast.metadata_dict().get("radius", default))
