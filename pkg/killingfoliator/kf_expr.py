import math
import operator
import re
from typing import NamedTuple, Any

import numpy as np

from killingfoliator.kf_core import ExpressionSyntaxError, UnknownVariableError, EvaluationError, \
    DimensionMismatchError

"""
Scalar expressions in ambient coordinates x1..xn (aliases x, y, z, w when n <= 4).

Grammar, loosest to tightest binding:
    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' ['-'] INTEGER)*
    atom  := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'
FUNC is one of sin, cos, exp.

"""

__license__ = 'MIT'

ALIASES = ('x', 'y', 'z', 'w')
FUNCTIONS = {
    'sin': (math.sin, np.sin),
    'cos': (math.cos, np.cos),
    'exp': (math.exp, np.exp),
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


class Const(NamedTuple):
    value: float


class Var(NamedTuple):
    index: int  # 0-based


class Neg(NamedTuple):
    arg: Any


class BinOp(NamedTuple):
    op: str
    left: Any
    right: Any


class Pow(NamedTuple):
    base: Any
    exponent: int


class Call(NamedTuple):
    name: str
    arg: Any


ZERO = Const(0.0)
ONE = Const(1.0)


def _byte_offset(text, char_offset):
    return len(text[:char_offset].encode('utf-8'))


def tokenize(text):
    """
    Split expression text into (kind, value, byte offset) triples; whitespace is dropped.
    :type text: str
    :return: list of tuples, terminated by ('end', None, offset)
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ExpressionSyntaxError('Unexpected character {!r}'.format(text[pos]), _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != 'ws':
            tokens.append((kind, m.group(kind), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(('end', None, _byte_offset(text, len(text))))
    return tokens


class _Parser(object):
    def __init__(self, text, dim):
        self.text = text
        self.dim = dim
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, tok_value, offset = self.advance()
        if tok_value != value:
            raise ExpressionSyntaxError('Expected {!r}, found {!r}'.format(value, tok_value or 'end of input'), offset)

    def parse(self):
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != 'end':
            raise ExpressionSyntaxError('Unexpected token {!r}'.format(value), offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ('+', '-'):
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ('*', '/'):
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == '-':
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while self.peek()[1] == '^':
            self.advance()
            sign = 1
            if self.peek()[1] == '-':
                self.advance()
                sign = -1
            kind, value, offset = self.advance()
            if kind != 'number' or not value.isdigit():
                raise ExpressionSyntaxError('Integer exponent expected, found {!r}'.format(value or 'end of input'),
                                            offset)
            node = Pow(node, sign * int(value))
        return node

    def atom(self):
        kind, value, offset = self.advance()
        if kind == 'number':
            return Const(float(value))
        if kind == 'name':
            if value in FUNCTIONS:
                self.expect('(')
                arg = self.expr()
                self.expect(')')
                return Call(value, arg)
            return Var(variable_index(value, self.dim, offset))
        if value == '(':
            node = self.expr()
            self.expect(')')
            return node
        raise ExpressionSyntaxError('Unexpected {!r}'.format(value or 'end of input'), offset)


def variable_index(name, dim, offset=0):
    """
    Resolve a variable name to its 0-based index.
    :param name: 'x1'..'xn', or one of x, y, z, w when dim <= 4
    :param dim: ambient dimension
    :param offset: byte offset reported on syntax errors
    """
    if name in ALIASES and dim <= len(ALIASES):
        index = ALIASES.index(name)
    elif re.fullmatch(r'x[1-9][0-9]*', name):
        index = int(name[1:]) - 1
    else:
        raise ExpressionSyntaxError('Unknown identifier {!r}'.format(name), offset)
    if index >= dim:
        raise UnknownVariableError('Variable {} refers to coordinate {} but the dimension is {}'.format(
            name, index + 1, dim))
    return index


def variable_name(index, dim):
    if dim <= len(ALIASES):
        return ALIASES[index]
    return 'x{}'.format(index + 1)


# constructors with literal folding

def _is_const(node, value=None):
    return isinstance(node, Const) and (value is None or node.value == value)


def _folded(fn, *args):
    """Const of fn(*args), or None when the literal result is not a finite float"""
    try:
        value = fn(*args)
    except (OverflowError, ValueError):
        return None
    return Const(value) if math.isfinite(value) else None


def make_neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def make_add(a, b):
    folded = _is_const(a) and _is_const(b) and _folded(operator.add, a.value, b.value)
    if folded:
        return folded
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp('+', a, b)


def make_sub(a, b):
    folded = _is_const(a) and _is_const(b) and _folded(operator.sub, a.value, b.value)
    if folded:
        return folded
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return make_neg(b)
    return BinOp('-', a, b)


def make_mul(a, b):
    folded = _is_const(a) and _is_const(b) and _folded(operator.mul, a.value, b.value)
    if folded:
        return folded
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp('*', a, b)


def make_div(a, b):
    folded = _is_const(a) and _is_const(b) and b.value != 0.0 and _folded(operator.truediv, a.value, b.value)
    if folded:
        return folded
    if _is_const(b, 1.0):
        return a
    return BinOp('/', a, b)


def make_pow(base, exponent):
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if _is_const(base) and (base.value != 0.0 or exponent > 0):
        folded = _folded(pow, base.value, exponent)
        if folded is not None:
            return folded
    return Pow(base, exponent)


def make_call(name, arg):
    if _is_const(arg):
        folded = _folded(FUNCTIONS[name][0], arg.value)
        if folded is not None:
            return folded
    return Call(name, arg)


def _derive(node, var):
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == var else ZERO
    if isinstance(node, Neg):
        return make_neg(_derive(node.arg, var))
    if isinstance(node, BinOp):
        dl = _derive(node.left, var)
        dr = _derive(node.right, var)
        if node.op == '+':
            return make_add(dl, dr)
        if node.op == '-':
            return make_sub(dl, dr)
        if node.op == '*':
            return make_add(make_mul(dl, node.right), make_mul(node.left, dr))
        # quotient rule
        numerator = make_sub(make_mul(dl, node.right), make_mul(node.left, dr))
        return make_div(numerator, make_pow(node.right, 2))
    if isinstance(node, Pow):
        k = node.exponent
        if k == 0:
            return ZERO
        return make_mul(make_mul(Const(float(k)), make_pow(node.base, k - 1)), _derive(node.base, var))
    if isinstance(node, Call):
        da = _derive(node.arg, var)
        if node.name == 'sin':
            outer = make_call('cos', node.arg)
        elif node.name == 'cos':
            outer = make_neg(make_call('sin', node.arg))
        else:
            outer = make_call('exp', node.arg)
        return make_mul(outer, da)
    raise TypeError('Unknown expression node {!r}'.format(node))


def _evaluate(node, coords):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return coords[node.index]
    if isinstance(node, Neg):
        return -_evaluate(node.arg, coords)
    if isinstance(node, BinOp):
        left = _evaluate(node.left, coords)
        right = _evaluate(node.right, coords)
        if node.op == '+':
            return left + right
        if node.op == '-':
            return left - right
        if node.op == '*':
            return left * right
        if np.any(np.asarray(right) == 0.0):
            raise EvaluationError('Division by zero in {}'.format(to_text(node, len(coords))))
        return left / right
    if isinstance(node, Pow):
        base = _evaluate(node.base, coords)
        if node.exponent < 0:
            if np.any(np.asarray(base) == 0.0):
                raise EvaluationError('Division by zero in {}'.format(to_text(node, len(coords))))
            return 1.0 / base ** (-node.exponent)
        return base ** node.exponent
    if isinstance(node, Call):
        return FUNCTIONS[node.name][1](_evaluate(node.arg, coords))
    raise TypeError('Unknown expression node {!r}'.format(node))


# printing precedence levels
_LEVEL_SUM, _LEVEL_PRODUCT, _LEVEL_UNARY, _LEVEL_POWER, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _format_number(value):
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _render(node, dim):
    """:return: (text, precedence level of the outermost construct)"""
    if isinstance(node, Const):
        text = _format_number(node.value)
        return text, _LEVEL_UNARY if node.value < 0 or text.startswith('-') else _LEVEL_ATOM
    if isinstance(node, Var):
        return variable_name(node.index, dim), _LEVEL_ATOM
    if isinstance(node, Neg):
        return '-' + _wrap(node.arg, dim, _LEVEL_UNARY), _LEVEL_UNARY
    if isinstance(node, BinOp):
        if node.op in '+-':
            return '{}{}{}'.format(_wrap(node.left, dim, _LEVEL_SUM), node.op,
                                   _wrap(node.right, dim, _LEVEL_PRODUCT)), _LEVEL_SUM
        return '{}{}{}'.format(_wrap(node.left, dim, _LEVEL_PRODUCT), node.op,
                               _wrap(node.right, dim, _LEVEL_UNARY)), _LEVEL_PRODUCT
    if isinstance(node, Pow):
        return '{}^{}'.format(_wrap(node.base, dim, _LEVEL_ATOM), node.exponent), _LEVEL_POWER
    if isinstance(node, Call):
        return '{}({})'.format(node.name, _render(node.arg, dim)[0]), _LEVEL_ATOM
    raise TypeError('Unknown expression node {!r}'.format(node))


def _wrap(node, dim, min_level):
    text, level = _render(node, dim)
    return text if level >= min_level else '(' + text + ')'


def to_text(node, dim):
    return _render(node, dim)[0]


class Expression(object):
    """
    An immutable scalar expression over R^dim.
    """

    def __init__(self, node, dim, text=None):
        """
        :param node: root of the syntax tree (Const, Var, Neg, BinOp, Pow or Call)
        :param dim: ambient dimension n
        :type dim: int
        :param text: source text, if the expression was parsed
        :type text: str
        """
        if dim < 1:
            raise ValueError('Expression dimension must be positive, got {}'.format(dim))
        self._node = node
        self._dim = dim
        self._text = text

    @property
    def node(self):
        return self._node

    @property
    def dim(self):
        return self._dim

    @property
    def text(self):
        """The source text when parsed, the printed form otherwise"""
        return self._text if self._text is not None else to_text(self._node, self._dim)

    def __str__(self):
        return to_text(self._node, self._dim)

    def __repr__(self):
        return '<Expression dim={} {!r}>'.format(self._dim, self.text)

    def is_constant(self, value=None):
        return _is_const(self._node, value)

    def evaluate(self, p):
        """
        Evaluate at one point.
        :param p: point in R^dim
        :return: float
        """
        p = np.asarray(p, dtype=float)
        if p.shape != (self._dim,):
            raise DimensionMismatchError('Point of shape {} given to an expression on R^{}'.format(p.shape, self._dim))
        return float(self.evaluate_many(p[None, :])[0])

    def evaluate_many(self, points):
        """
        Evaluate at every row of `points`.
        :param points: array of shape (m, dim)
        :return: array of shape (m,)
        """
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self._dim:
            raise DimensionMismatchError('Points of shape {} given to an expression on R^{}'.format(
                points.shape, self._dim))
        with np.errstate(all='ignore'):
            values = _evaluate(self._node, [points[:, i] for i in range(self._dim)])
        values = np.broadcast_to(np.asarray(values, dtype=float), (points.shape[0],)).copy()
        if not np.all(np.isfinite(values)):
            raise EvaluationError('Non-finite value of {}'.format(self.text))
        return values

    def differentiate(self, var):
        """
        Exact symbolic partial derivative. Only literal subtrees are folded; no other simplification.
        :param var: 1-based coordinate index or a variable name
        :type var: int or str
        :return: Expression
        """
        index = var - 1 if isinstance(var, int) else variable_index(var, self._dim)
        if not 0 <= index < self._dim:
            raise UnknownVariableError('Cannot differentiate a R^{} expression by coordinate {}'.format(
                self._dim, var))
        return Expression(_derive(self._node, index), self._dim)

    def _coerce(self, other):
        if isinstance(other, Expression):
            if other.dim != self._dim:
                raise DimensionMismatchError('Cannot combine expressions on R^{} and R^{}'.format(
                    self._dim, other.dim))
            return other.node
        return Const(float(other))

    def __add__(self, other):
        return Expression(make_add(self._node, self._coerce(other)), self._dim)

    def __radd__(self, other):
        return Expression(make_add(self._coerce(other), self._node), self._dim)

    def __sub__(self, other):
        return Expression(make_sub(self._node, self._coerce(other)), self._dim)

    def __rsub__(self, other):
        return Expression(make_sub(self._coerce(other), self._node), self._dim)

    def __mul__(self, other):
        return Expression(make_mul(self._node, self._coerce(other)), self._dim)

    def __rmul__(self, other):
        return Expression(make_mul(self._coerce(other), self._node), self._dim)

    def __neg__(self):
        return Expression(make_neg(self._node), self._dim)


def parse_expr(text, dim):
    """
    Parse expression text.
    :param text: e.g. "x^2 + y*z"
    :type text: str
    :param dim: ambient dimension, >= 1
    :type dim: int
    :return: Expression
    """
    if dim < 1:
        raise ValueError('Expression dimension must be positive, got {}'.format(dim))
    if not text or not text.strip():
        raise ExpressionSyntaxError('Empty expression', 0)
    return Expression(_Parser(text, dim).parse(), dim, text=text)


def constant(value, dim):
    return Expression(Const(float(value)), dim)


def coordinate(index, dim):
    """The coordinate function x_index (1-based)"""
    return Expression(Var(index - 1), dim)


def differentiate(e, var):
    return e.differentiate(var)


def evaluate(e, p):
    return e.evaluate(p)
