"""Recursive-descent parser for the declaration and statement layers of Java.

Expressions are not parsed into trees. They are kept as token ranges and
analysed on demand by :mod:`ktforge.frontend.exprs`, which is all the
downstream analyses need.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .lexer import PRIMITIVES, Comment, Token, tokenize

MODIFIERS = frozenset(
    "public protected private static final abstract native synchronized "
    "transient volatile strictfp default sealed".split()
)
TYPE_KEYWORDS = ("class", "interface", "enum")


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# ---------------------------------------------------------------------------
# declaration layer


@dataclass
class Annotation:
    name: str
    text: str
    start: int
    end: int


@dataclass
class Param:
    name: str
    type_text: str
    start: int
    end: int


@dataclass
class Declarator:
    name: str
    init: Optional["Expr"]


@dataclass
class FieldMember:
    type_text: str
    declarators: list[Declarator]
    modifiers: frozenset[str]
    annotations: list[Annotation]
    start: int
    end: int
    head: int
    kind: str = "field"


@dataclass
class EnumConstant:
    name: str
    start: int
    end: int
    head: int
    annotations: list[Annotation] = field(default_factory=list)
    kind: str = "enum_constant"


@dataclass
class MethodMember:
    name: str
    is_constructor: bool
    return_type: Optional[str]
    type_params: str
    params: list[Param]
    throws: list[str]
    modifiers: frozenset[str]
    annotations: list[Annotation]
    start: int
    end: int
    head: int
    body_span: Optional[tuple[int, int]]  # inclusive of braces
    kind: str = "method"


@dataclass
class Initializer:
    is_static: bool
    start: int
    end: int
    body_span: tuple[int, int]
    kind: str = "initializer"


@dataclass
class TypeDecl:
    kind: str  # class | interface | enum | annotation | record
    name: str
    modifiers: frozenset[str]
    annotations: list[Annotation]
    type_params: str
    extends: list[str]
    implements: list[str]
    start: int
    end: int
    head: int
    body_start: int
    members: list = field(default_factory=list)


@dataclass
class ImportDecl:
    name: str
    is_static: bool
    start: int
    end: int


@dataclass
class CompilationUnit:
    package: str
    imports: list[ImportDecl]
    types: list[TypeDecl]
    comments: list[Comment]
    tokens: list[Token]


# ---------------------------------------------------------------------------
# statement layer


@dataclass
class Expr:
    lo: int  # token index range [lo, hi)
    hi: int
    start: int
    end: int

    def text(self, source: str) -> str:
        return source[self.start : self.end]


@dataclass
class Stmt:
    start: int
    end: int


@dataclass
class Block(Stmt):
    stmts: list[Stmt]


@dataclass
class LocalVar(Stmt):
    type_text: str
    declarators: list[Declarator]


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class DoWhile(Stmt):
    body: Stmt
    cond: Expr


@dataclass
class For(Stmt):
    init: list[Stmt]
    cond: Optional[Expr]
    update: list[Expr]
    body: Stmt
    header_end: int


@dataclass
class ForEach(Stmt):
    var_type: str
    var_name: str
    iterable: Expr
    body: Stmt
    header_end: int


@dataclass
class SwitchCase:
    labels: list[Expr]  # empty for default
    body: list[Stmt]
    arrow: bool
    start: int
    end: int


@dataclass
class Switch(Stmt):
    selector: Expr
    cases: list[SwitchCase]


@dataclass
class Return(Stmt):
    value: Optional[Expr]


@dataclass
class Throw(Stmt):
    value: Expr


@dataclass
class Jump(Stmt):
    keyword: str  # break | continue
    label: Optional[str]


@dataclass
class Catch:
    types: list[str]
    name: str
    block: Block
    start: int
    header_end: int


@dataclass
class Try(Stmt):
    resources: list[Stmt]
    block: Block
    catches: list[Catch]
    final: Optional[Block]


@dataclass
class Synchronized(Stmt):
    lock: Expr
    block: Block


@dataclass
class Labeled(Stmt):
    label: str
    body: Stmt


@dataclass
class Opaque(Stmt):
    """Statement kept as plain text (assert, yield, local class, empty)."""

    expr: Optional[Expr] = None


# ---------------------------------------------------------------------------


def normalize_type(tokens: list[Token]) -> str:
    out: list[str] = []
    prev_word = False
    for tok in tokens:
        word = tok.kind in ("ident", "keyword") or tok.text == "?"
        if word and prev_word:
            out.append(" ")
        if tok.text == "&":
            out.append(" & ")
        elif tok.text == ",":
            out.append(", ")
        else:
            out.append(tok.text)
        prev_word = word
    return "".join(out)


class _Parser:
    def __init__(self, source: str, tokens: list[Token]):
        self.source = source
        self.toks = tokens
        self.pos = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Optional[Token]:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.text == text

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.source))
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            where = tok.start if tok else len(self.source)
            found = tok.text if tok else "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", where)
        self.pos += 1
        return tok

    def ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != "ident":
            where = tok.start if tok else len(self.source)
            raise ParseError("expected identifier", where)
        self.pos += 1
        return tok

    def skip_balanced(self) -> Token:
        """Consume a bracketed group starting at the current token; return the closer."""
        pairs = {"(": ")", "[": "]", "{": "}"}
        opener = self.next()
        stack = [pairs[opener.text]]
        while stack:
            tok = self.next()
            if tok.text in pairs:
                stack.append(pairs[tok.text])
            elif tok.text in (")", "]", "}"):
                if tok.text != stack.pop():
                    raise ParseError(f"mismatched {tok.text!r}", tok.start)
        return tok

    def prev_end(self) -> int:
        return self.toks[self.pos - 1].end if self.pos else 0

    # -- types -------------------------------------------------------------

    def try_type(self) -> Optional[str]:
        """Parse a type at the cursor; restore and return None if there is none."""
        save = self.pos
        try:
            return self.parse_type()
        except ParseError:
            self.pos = save
            return None

    def parse_type(self) -> str:
        while self.at("@") and not self.at("interface", 1):
            self.annotation()
        tok = self.peek()
        if tok is None:
            raise ParseError("expected type", len(self.source))
        sig_start = self.pos
        if tok.text in PRIMITIVES:
            self.pos += 1
        elif tok.kind == "ident":
            self.pos += 1
            self.type_args_opt()
            while self.at(".") and self.peek(1) is not None and self.peek(1).kind == "ident":
                self.pos += 2
                self.type_args_opt()
        else:
            raise ParseError("expected type", tok.start)
        while self.at("[") and self.at("]", 1):
            self.pos += 2
        return normalize_type(self.toks[sig_start : self.pos])

    def type_args_opt(self) -> None:
        if not self.at("<"):
            return
        depth = 0
        allowed = {"<", ">", ",", ".", "?", "&", "[", "]", "extends", "super", "@"}
        while True:
            tok = self.next()
            if tok.text == "<":
                depth += 1
            elif tok.text == ">":
                depth -= 1
                if depth == 0:
                    return
            elif tok.kind == "ident" or tok.text in PRIMITIVES:
                pass
            elif tok.text not in allowed:
                raise ParseError("not a type argument list", tok.start)

    # -- annotations and modifiers -----------------------------------------

    def annotation(self) -> Annotation:
        at = self.expect("@")
        name = self.ident().text
        while self.at(".") and self.peek(1) is not None and self.peek(1).kind == "ident":
            self.pos += 1
            name += "." + self.next().text
        end = self.prev_end()
        if self.at("("):
            end = self.skip_balanced().end
        return Annotation(name, self.source[at.start : end], at.start, end)

    def modifiers(self) -> tuple[frozenset[str], list[Annotation], int]:
        mods: set[str] = set()
        annos: list[Annotation] = []
        head = -1
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.text == "@" and not self.at("interface", 1):
                annos.append(self.annotation())
                continue
            if tok.text in MODIFIERS and not (tok.text == "default" and self.at(":", 1)):
                if head < 0:
                    head = tok.start
                mods.add(tok.text)
                self.pos += 1
                continue
            if tok.text == "non" and self.at("-", 1) and self.at("sealed", 2):
                if head < 0:
                    head = tok.start
                self.pos += 3
                continue
            break
        if head < 0:
            tok = self.peek()
            head = tok.start if tok else len(self.source)
        return frozenset(mods), annos, head

    # -- compilation unit --------------------------------------------------

    def compilation_unit(self) -> tuple[str, list[ImportDecl], list[TypeDecl]]:
        package = ""
        imports: list[ImportDecl] = []
        save = self.pos
        while self.at("@") and not self.at("interface", 1):
            self.annotation()
        if self.at("package"):
            self.next()
            package = self.qualified_name()
            self.expect(";")
        else:
            self.pos = save
        while self.at("import"):
            start = self.next().start
            is_static = False
            if self.at("static"):
                self.next()
                is_static = True
            name = self.qualified_name(allow_star=True)
            end = self.expect(";").end
            imports.append(ImportDecl(name, is_static, start, end))
        types: list[TypeDecl] = []
        while self.peek() is not None:
            if self.at(";"):
                self.next()
                continue
            types.append(self.type_decl())
        return package, imports, types

    def qualified_name(self, allow_star: bool = False) -> str:
        parts = [self.ident().text]
        while self.at("."):
            self.next()
            if allow_star and self.at("*"):
                self.next()
                parts.append("*")
                break
            parts.append(self.ident().text)
        return ".".join(parts)

    def type_decl(self) -> TypeDecl:
        start = self.peek().start
        mods, annos, head = self.modifiers()
        return self.type_decl_rest(start, mods, annos, head)

    def type_decl_rest(self, start: int, mods, annos, head: int) -> TypeDecl:
        tok = self.next()
        head = min(head, tok.start)
        if tok.text == "@":
            self.expect("interface")
            kind = "annotation"
        elif tok.text in TYPE_KEYWORDS:
            kind = tok.text
        elif tok.text == "record":
            kind = "record"
        else:
            raise ParseError(f"expected type declaration, found {tok.text!r}", tok.start)
        name = self.ident().text
        type_params = ""
        if self.at("<"):
            tp_start = self.pos
            self.type_args_opt()
            type_params = normalize_type(self.toks[tp_start : self.pos])
        components: list[Param] = []
        if kind == "record" and self.at("("):
            components = self.params()
        extends: list[str] = []
        implements: list[str] = []
        while not self.at("{"):
            tok = self.next()
            if tok.text == "extends":
                target = extends
            elif tok.text == "implements":
                target = implements
            elif tok.text == "permits":
                target = []
            else:
                raise ParseError(f"unexpected {tok.text!r} in type header", tok.start)
            target.append(self.parse_type())
            while self.at(","):
                self.next()
                target.append(self.parse_type())
        body_start = self.peek().start
        decl = TypeDecl(kind, name, mods, annos, type_params, extends, implements, start, 0, head, body_start)
        for comp in components:
            decl.members.append(
                FieldMember(comp.type_text, [Declarator(comp.name, None)], frozenset({"private", "final"}), [], comp.start, comp.end, comp.start)
            )
        self.class_body(decl)
        decl.end = self.prev_end()
        return decl

    def class_body(self, decl: TypeDecl) -> None:
        self.expect("{")
        if decl.kind == "enum":
            self.enum_constants(decl)
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unbalanced braces: class body not closed", len(self.source))
            if self.at(";"):
                self.next()
                continue
            decl.members.append(self.member(decl))
        self.expect("}")

    def enum_constants(self, decl: TypeDecl) -> None:
        while not self.at(";") and not self.at("}"):
            start = self.peek().start
            annos = []
            while self.at("@"):
                annos.append(self.annotation())
            name_tok = self.ident()
            if self.at("("):
                self.skip_balanced()
            if self.at("{"):
                self.skip_balanced()
            decl.members.append(EnumConstant(name_tok.text, start, self.prev_end(), name_tok.start, annos))
            if self.at(","):
                self.next()
        if self.at(";"):
            self.next()

    def member(self, decl: TypeDecl):
        start = self.peek().start
        mods, annos, head = self.modifiers()
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of class body", len(self.source))
        if tok.text == "{":
            first = self.pos
            close = self.skip_balanced()
            return Initializer("static" in mods, start, close.end, (self.toks[first].start, close.end))
        if tok.text in TYPE_KEYWORDS or (tok.text == "@" and self.at("interface", 1)) or (
            tok.text == "record" and self.peek(1) is not None and self.peek(1).kind == "ident" and self.at("(", 2)
        ):
            return self.type_decl_rest(start, mods, annos, head)
        type_params = ""
        if tok.text == "<":
            tp_start = self.pos
            self.type_args_opt()
            type_params = normalize_type(self.toks[tp_start : self.pos])
        tok = self.peek()
        if tok is not None and tok.kind == "ident" and tok.text == decl.name and (self.at("(", 1) or self.at("{", 1)):
            self.next()
            params = self.params() if self.at("(") else []
            return self.method_rest(tok.text, True, None, type_params, params, mods, annos, start, head)
        type_text = self.parse_type()
        name_tok = self.ident()
        if self.at("("):
            params = self.params()
            return self.method_rest(name_tok.text, False, type_text, type_params, params, mods, annos, start, head)
        declarators = self.declarators(name_tok)
        end = self.expect(";").end
        return FieldMember(type_text, declarators, mods, annos, start, end, head)

    def params(self) -> list[Param]:
        self.expect("(")
        params: list[Param] = []
        while not self.at(")"):
            start = self.peek().start
            self.modifiers()
            type_text = self.parse_type()
            if self.at("..."):
                self.next()
                type_text += "..."
            if self.at("this"):
                self.next()
            else:
                name = self.ident().text
                while self.at("[") and self.at("]", 1):
                    self.pos += 2
                    type_text += "[]"
                params.append(Param(name, type_text, start, self.prev_end()))
            if self.at(","):
                self.next()
            elif not self.at(")"):
                tok = self.peek()
                raise ParseError("malformed parameter list", tok.start if tok else len(self.source))
        self.expect(")")
        return params

    def method_rest(self, name, is_ctor, return_type, type_params, params, mods, annos, start, head) -> MethodMember:
        while self.at("[") and self.at("]", 1):
            self.pos += 2
            return_type += "[]"
        throws: list[str] = []
        if self.at("throws"):
            self.next()
            throws.append(self.parse_type())
            while self.at(","):
                self.next()
                throws.append(self.parse_type())
        body_span = None
        if self.at("{"):
            open_tok = self.peek()
            close = self.skip_balanced()
            body_span = (open_tok.start, close.end)
        elif self.at("default"):
            while not self.at(";"):
                if self.peek() is None:
                    raise ParseError("unterminated annotation default", len(self.source))
                self.next()
            self.expect(";")
        else:
            self.expect(";")
        return MethodMember(name, is_ctor, return_type, type_params, params, throws, mods, annos, start, self.prev_end(), head, body_span)

    def declarators(self, first: Token) -> list[Declarator]:
        out: list[Declarator] = []
        name_tok = first
        while True:
            while self.at("[") and self.at("]", 1):
                self.pos += 2
            init = None
            if self.at("="):
                self.next()
                init = self.expr_until((";",), split_declarators=True)
            out.append(Declarator(name_tok.text, init))
            if self.at(","):
                self.next()
                name_tok = self.ident()
                continue
            return out

    # -- expressions (token ranges) ----------------------------------------

    def expr_until(self, stops: tuple[str, ...], split_declarators: bool = False) -> Expr:
        lo = self.pos
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unterminated expression", len(self.source))
            if depth == 0:
                if tok.text in stops:
                    break
                if split_declarators and tok.text == "," and self._declarator_follows():
                    break
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                if depth == 0:
                    break
                depth -= 1
            self.pos += 1
        if self.pos == lo:
            tok = self.peek()
            raise ParseError("expected expression", tok.start if tok else len(self.source))
        return Expr(lo, self.pos, self.toks[lo].start, self.toks[self.pos - 1].end)

    def _declarator_follows(self) -> bool:
        nxt, after = self.peek(1), self.peek(2)
        return nxt is not None and nxt.kind == "ident" and after is not None and after.text in ("=", ",", ";", "[")

    # -- statements --------------------------------------------------------

    def block(self) -> Block:
        open_tok = self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unbalanced braces: block not closed", len(self.source))
            stmts.append(self.statement())
        close = self.expect("}")
        return Block(open_tok.start, close.end, stmts)

    def statement(self) -> Stmt:
        tok = self.peek()
        text = tok.text
        start = tok.start
        if text == "{":
            return self.block()
        if text == ";":
            self.next()
            return Opaque(start, tok.end)
        if text == "if":
            self.next()
            cond = self.paren_expr()
            then = self.statement()
            orelse = None
            if self.at("else"):
                self.next()
                orelse = self.statement()
            return If(start, self.prev_end(), cond, then, orelse)
        if text == "while":
            self.next()
            cond = self.paren_expr()
            body = self.statement()
            return While(start, self.prev_end(), cond, body)
        if text == "do":
            self.next()
            body = self.statement()
            self.expect("while")
            cond = self.paren_expr()
            self.expect(";")
            return DoWhile(start, self.prev_end(), body, cond)
        if text == "for":
            return self.for_statement()
        if text == "switch" and self.at("(", 1):
            return self.switch_statement()
        if text == "return":
            self.next()
            value = None if self.at(";") else self.expr_until((";",))
            self.expect(";")
            return Return(start, self.prev_end(), value)
        if text == "throw":
            self.next()
            value = self.expr_until((";",))
            self.expect(";")
            return Throw(start, self.prev_end(), value)
        if text in ("break", "continue"):
            self.next()
            label = self.next().text if self.peek() is not None and self.peek().kind == "ident" else None
            self.expect(";")
            return Jump(start, self.prev_end(), text, label)
        if text == "try":
            return self.try_statement()
        if text == "synchronized" and self.at("(", 1):
            self.next()
            lock = self.paren_expr()
            body = self.block()
            return Synchronized(start, self.prev_end(), lock, body)
        if text == "assert" or (text == "yield" and not (self.at("=", 1) or self.at("(", 1) or self.at(".", 1))):
            self.next()
            value = self.expr_until((";",))
            self.expect(";")
            return Opaque(start, self.prev_end(), value)
        if tok.kind == "ident" and self.at(":", 1):
            self.pos += 2
            body = self.statement()
            return Labeled(start, self.prev_end(), text, body)
        if text in TYPE_KEYWORDS or (text in ("abstract", "final", "static") and self._local_class_follows()):
            decl = self.type_decl()
            return Opaque(start, decl.end)
        local = self.try_local_var()
        if local is not None:
            return local
        expr = self.expr_until((";",))
        self.expect(";")
        return ExprStmt(start, self.prev_end(), expr)

    def _local_class_follows(self) -> bool:
        k = 0
        while self.peek(k) is not None and self.peek(k).text in MODIFIERS:
            k += 1
        return self.peek(k) is not None and self.peek(k).text in TYPE_KEYWORDS

    def paren_expr(self) -> Expr:
        self.expect("(")
        expr = self.expr_until((")",))
        self.expect(")")
        return expr

    def try_local_var(self, terminator: str = ";") -> Optional[LocalVar]:
        save = self.pos
        start = self.peek().start
        while self.at("final") or (self.at("@") and not self.at("interface", 1)):
            if self.at("final"):
                self.next()
            else:
                self.annotation()
        type_text = self.try_type()
        if type_text is None or self.peek() is None or self.peek().kind != "ident":
            self.pos = save
            return None
        after = self.peek(1)
        if after is None or after.text not in ("=", ";", ",", "["):
            self.pos = save
            return None
        name_tok = self.ident()
        declarators = self.declarators(name_tok)
        if terminator:
            self.expect(terminator)
        return LocalVar(start, self.prev_end(), type_text, declarators)

    def for_statement(self) -> Stmt:
        start = self.next().start
        self.expect("(")
        save = self.pos
        while self.at("final") or (self.at("@") and not self.at("interface", 1)):
            if self.at("final"):
                self.next()
            else:
                self.annotation()
        var_type = self.try_type()
        if var_type is not None and self.peek() is not None and self.peek().kind == "ident" and self.at(":", 1):
            name = self.next().text
            self.expect(":")
            iterable = self.expr_until((")",))
            header_end = self.expect(")").end
            body = self.statement()
            return ForEach(start, self.prev_end(), var_type, name, iterable, body, header_end)
        self.pos = save
        init: list[Stmt] = []
        if not self.at(";"):
            local = self.try_local_var(terminator="")
            if local is not None:
                init.append(local)
            else:
                while True:
                    expr = self.expr_until((";", ","))
                    init.append(ExprStmt(expr.start, expr.end, expr))
                    if self.at(","):
                        self.next()
                        continue
                    break
        self.expect(";")
        cond = None if self.at(";") else self.expr_until((";",))
        self.expect(";")
        update: list[Expr] = []
        while not self.at(")"):
            update.append(self.expr_until((",",)))
            if self.at(","):
                self.next()
        header_end = self.expect(")").end
        body = self.statement()
        return For(start, self.prev_end(), init, cond, update, body, header_end)

    def switch_statement(self) -> Switch:
        start = self.next().start
        selector = self.paren_expr()
        self.expect("{")
        cases: list[SwitchCase] = []
        while not self.at("}"):
            case_tok = self.next()
            labels: list[Expr] = []
            if case_tok.text == "case":
                while True:
                    labels.append(self.expr_until((":", "->", ",")))
                    if self.at(","):
                        self.next()
                        continue
                    break
            elif case_tok.text != "default":
                raise ParseError(f"expected case label, found {case_tok.text!r}", case_tok.start)
            arrow = self.at("->")
            self.next()
            body: list[Stmt] = []
            if arrow:
                if self.at("{"):
                    body.append(self.block())
                elif self.at("throw"):
                    body.append(self.statement())
                else:
                    expr = self.expr_until((";",))
                    self.expect(";")
                    body.append(ExprStmt(expr.start, self.prev_end(), expr))
            else:
                while not (self.at("case") or self.at("default") and (self.at(":", 1) or self.at("->", 1)) or self.at("}")):
                    if self.peek() is None:
                        raise ParseError("unbalanced braces: switch not closed", len(self.source))
                    body.append(self.statement())
            cases.append(SwitchCase(labels, body, arrow, case_tok.start, self.prev_end()))
        end = self.expect("}").end
        return Switch(start, end, selector, cases)

    def try_statement(self) -> Try:
        start = self.next().start
        resources: list[Stmt] = []
        if self.at("("):
            self.next()
            while not self.at(")"):
                local = self.try_local_var(terminator="")
                if local is None:
                    expr = self.expr_until((";", ")"))
                    local = ExprStmt(expr.start, expr.end, expr)
                resources.append(local)
                if self.at(";"):
                    self.next()
            self.expect(")")
        body = self.block()
        catches: list[Catch] = []
        while self.at("catch"):
            cstart = self.next().start
            self.expect("(")
            self.modifiers()
            types = [self.parse_type()]
            while self.at("|"):
                self.next()
                types.append(self.parse_type())
            name = self.ident().text
            header_end = self.expect(")").end
            catches.append(Catch(types, name, self.block(), cstart, header_end))
        final = None
        if self.at("finally"):
            self.next()
            final = self.block()
        if not catches and final is None and not resources:
            raise ParseError("try without catch or finally", start)
        return Try(start, self.prev_end(), resources, body, catches, final)


def parse_compilation_unit(source: str) -> CompilationUnit:
    tokens, comments = tokenize(source)
    parser = _Parser(source, tokens)
    package, imports, types = parser.compilation_unit()
    return CompilationUnit(package, imports, types, comments, tokens)


def parse_block(source: str, span: tuple[int, int]) -> tuple[Block, list[Token]]:
    """Parse the braced block at ``span`` of ``source`` into statements.

    Results are memoized on (source, span); callers treat them as read-only.
    """
    return _parse_block(source, span[0], span[1])


@lru_cache(maxsize=4096)
def _parse_block(source: str, start: int, end: int) -> tuple[Block, list[Token]]:
    span = (start, end)
    tokens, _ = tokenize(source, span[0], span[1])
    parser = _Parser(source, tokens)
    block = parser.block()
    if parser.peek() is not None:
        raise ParseError("trailing tokens after block", parser.peek().start)
    return block, tokens


def parse_members(source: str, class_name: str = "__Members__") -> tuple[list, list[Token]]:
    """Parse a run of class members that is not wrapped in a class."""
    tokens, _ = tokenize(source)
    parser = _Parser(source, tokens)
    decl = TypeDecl("class", class_name, frozenset(), [], "", [], [], 0, 0, 0, 0)
    while parser.peek() is not None:
        if parser.at(";"):
            parser.next()
            continue
        decl.members.append(parser.member(decl))
    return decl.members, tokens
