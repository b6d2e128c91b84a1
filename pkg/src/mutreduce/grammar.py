"""BNF grammars describing the space of reduction strategies.

Format, one rule per logical line (continuation lines belong to the most
recent rule):

    # comment
    <name> ::= "terminal" <other> | "alternative two"

Terminals are double-quoted; the empty terminal ``""`` expands to nothing
and gives list-shaped rules their stop alternative. Validation rejects
grammars that reference undefined non-terminals, define a rule twice, or
contain a rule that cannot reach a finite derivation, so genotype mapping
always terminates on a validated grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property


class GrammarError(ValueError):
    """Raised for malformed or non-terminating grammar text."""


@dataclass(frozen=True)
class Terminal:
    text: str

    def render(self) -> str:
        return f'"{self.text}"'


@dataclass(frozen=True)
class NonTerminal:
    name: str

    def render(self) -> str:
        return f"<{self.name}>"


Symbol = Terminal | NonTerminal


@dataclass(frozen=True)
class Production:
    symbols: tuple[Symbol, ...]

    def render(self) -> str:
        return " ".join(s.render() for s in self.symbols)


@dataclass(frozen=True)
class Rule:
    name: str
    productions: tuple[Production, ...]


@dataclass(frozen=True)
class Grammar:
    """Validated rule set; the first rule is the start symbol."""

    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        _validate(self.rules)

    @property
    def start(self) -> str:
        return self.rules[0].name

    @cached_property
    def by_name(self) -> dict[str, Rule]:
        return {rule.name: rule for rule in self.rules}

    def render(self) -> str:
        lines = []
        for rule in self.rules:
            alternatives = " | ".join(p.render() for p in rule.productions)
            lines.append(f"<{rule.name}> ::= {alternatives}")
        return "\n".join(lines) + "\n"


def _validate(rules: tuple[Rule, ...]) -> None:
    if not rules:
        raise GrammarError("grammar has no rules")
    seen: set[str] = set()
    for rule in rules:
        if rule.name in seen:
            raise GrammarError(f"rule <{rule.name}> defined twice")
        seen.add(rule.name)
        if not rule.productions:
            raise GrammarError(f"rule <{rule.name}> has no productions")
    defined = {rule.name for rule in rules}
    for rule in rules:
        for production in rule.productions:
            for symbol in production.symbols:
                if isinstance(symbol, NonTerminal) and symbol.name not in defined:
                    raise GrammarError(
                        f"rule <{rule.name}> references undefined non-terminal "
                        f"<{symbol.name}>")
    # Every rule must be able to reach a finite derivation, otherwise the
    # genotype mapper could loop forever without consuming genes.
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule.name in productive:
                continue
            for production in rule.productions:
                if all(isinstance(s, Terminal) or s.name in productive
                       for s in production.symbols):
                    productive.add(rule.name)
                    changed = True
                    break
    dead = [rule.name for rule in rules if rule.name not in productive]
    if dead:
        raise GrammarError(
            "rules cannot terminate (every derivation is infinite): "
            + ", ".join(f"<{name}>" for name in dead))


_RULE_HEAD = re.compile(r"^\s*<([^<>\s]+)>\s*::=(.*)$", re.DOTALL)
_TOKEN = re.compile(r'\s*(?:"([^"]*)"|<([^<>\s]+)>|(\S))')


def _strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _split_alternatives(text: str, rule_name: str) -> list[str]:
    parts: list[str] = []
    current: list[str] = []
    in_quote = False
    for ch in text:
        if ch == '"':
            in_quote = not in_quote
            current.append(ch)
        elif ch == "|" and not in_quote:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if in_quote:
        raise GrammarError(f"rule <{rule_name}>: unterminated quote")
    parts.append("".join(current))
    return parts


def _parse_symbols(text: str, rule_name: str) -> tuple[Symbol, ...]:
    symbols: list[Symbol] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            break
        terminal, non_terminal, stray = match.groups()
        if stray is not None:
            raise GrammarError(
                f"rule <{rule_name}>: unexpected character {stray!r} "
                f"(terminals must be double-quoted)")
        if terminal is not None:
            symbols.append(Terminal(terminal))
        else:
            symbols.append(NonTerminal(non_terminal))
        pos = match.end()
    if not symbols:
        raise GrammarError(f"rule <{rule_name}>: empty alternative "
                           f'(use "" for an explicitly empty one)')
    return tuple(symbols)


def parse_grammar(text: str) -> Grammar:
    """Parse and validate grammar text; errors carry the offending rule."""
    chunks: list[tuple[str, str]] = []
    for raw_line in text.splitlines():
        line = _strip_comment(raw_line).rstrip()
        if not line.strip():
            continue
        head = _RULE_HEAD.match(line)
        if head:
            chunks.append((head.group(1), head.group(2)))
        elif chunks:
            name, body = chunks[-1]
            chunks[-1] = (name, body + " " + line.strip())
        else:
            raise GrammarError(f"expected a rule, got: {line.strip()!r}")
    rules = []
    for name, body in chunks:
        productions = tuple(
            Production(_parse_symbols(alt, name))
            for alt in _split_alternatives(body, name)
        )
        rules.append(Rule(name=name, productions=productions))
    return Grammar(rules=tuple(rules))


# The built-in strategy language. Option order is part of the genotype
# encoding: reordering alternatives changes what existing chromosomes mean.
DEFAULT_GRAMMAR_TEXT = """\
# Reduction strategies: trim the operator pool, execute part of it, then
# trim the generated mutants, optionally working on per-operator groups.
<strategy> ::= <operatorStage> <executeOperators> <mutantStage>

<operatorStage> ::= "" | <operatorOperation> <operatorStage>
<operatorOperation> ::= "Retain Operators" <selection>
                      | "Discard Operators" <selection>

<executeOperators> ::= "Execute Operators" <selection>

<mutantStage> ::= "" | <mutantOperation> <mutantStage>
<mutantOperation> ::= "Retain Mutants" <selection>
                    | "Discard Mutants" <selection>
                    | <groupPipeline>

<groupPipeline> ::= "Group Mutants by Operator" <groupStage> "Sample Each Group" <selection>
<groupStage> ::= "" | <groupOperation> <groupStage>
<groupOperation> ::= "Order Groups by Size" <direction>
                   | "Retain Groups" <edge> <count>
                   | "Discard Groups" <edge> <count>

<direction> ::= "Ascending" | "Descending"
<edge> ::= "First" | "Last"

<selection> ::= "Random" <percentage> | "Random" <quantity>
<percentage> ::= "10%" | "20%" | "30%" | "40%" | "50%" | "60%" | "70%" | "80%" | "90%" | "100%"
<quantity> ::= "1" | "2" | "3" | "4" | "5" | "6" | "7" | "8" | "9" | "10"
<count> ::= "1" | "2" | "3" | "4" | "5" | "6" | "7" | "8" | "9" | "10"
"""


def default_grammar() -> Grammar:
    return parse_grammar(DEFAULT_GRAMMAR_TEXT)
