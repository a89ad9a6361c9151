"""Per-variable slice profiles and complete-slice composition.

A slice profile records where a variable is defined and used inside one
function, which variables depend on it (dvars), which variables it
aliases (ptrs) and which calls receive it as an argument (cfuncs).  The
complete slice for a criterion unions the criterion's def/use lines with
the slices of its dvars, ptrs and in-corpus callee parameters, then drops
everything before the criterion's first definition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .source_model import (
    CALL_ARGUMENT,
    DEFINITION,
    POINTER_ASSIGNMENT,
    USE,
    FunctionUnit,
    SourceUnit,
)


Criterion = tuple[str, str, str]  # (file, function, variable)

# call_graph: callee name -> arg position (1-based) -> parameter profiles
CallGraph = dict[str, dict[int, list["SliceProfile"]]]


class CriterionNotFoundError(KeyError):
    """The requested (file, function, variable) has no slice profile."""


@dataclass(frozen=True)
class SliceProfile:
    file: str
    function: str
    variable: str
    def_lines: frozenset[int] = frozenset()
    use_lines: frozenset[int] = frozenset()
    dvars: frozenset[str] = frozenset()
    ptrs: frozenset[str] = frozenset()
    cfuncs: frozenset[tuple[str, int]] = frozenset()

    @property
    def key(self) -> Criterion:
        return (self.file, self.function, self.variable)

    def own_lines(self) -> frozenset[int]:
        return self.def_lines | self.use_lines

    def to_json(self) -> str:
        return json.dumps(
            {
                "file": self.file,
                "function": self.function,
                "variable": self.variable,
                "def": sorted(self.def_lines),
                "use": sorted(self.use_lines),
                "dvars": sorted(self.dvars),
                "ptrs": sorted(self.ptrs),
                "cfuncs": [[name, pos] for name, pos in sorted(self.cfuncs)],
            }
        )


@dataclass(frozen=True)
class CompleteSlice:
    criterion: Criterion
    lines: frozenset[int]
    contributing_profiles: int
    unique_identifiers: frozenset[str]
    # first/last def-or-use line of the criterion variable itself, after the
    # pre-definition cut; bounds the spatial metric even when the slice
    # grows across functions.
    span_first: int
    span_last: int


def compute_slice_profiles(unit: SourceUnit) -> list[SliceProfile]:
    """One profile per (function, variable) that has any occurrence."""
    profiles: list[SliceProfile] = []
    for fn in unit.functions:
        profiles.extend(_function_profiles(unit.path, fn))
    return profiles


def _function_profiles(path: str, fn: FunctionUnit) -> list[SliceProfile]:
    defs: dict[str, set[int]] = {}
    uses: dict[str, set[int]] = {}
    ptrs: dict[str, set[str]] = {}
    cfuncs: dict[str, set[tuple[str, int]]] = {}
    order: list[str] = []

    def bucket(name: str) -> None:
        if name not in defs:
            defs[name] = set()
            uses[name] = set()
            ptrs[name] = set()
            cfuncs[name] = set()
            order.append(name)

    for occ in fn.variable_occurrences:
        bucket(occ.name)
        if occ.kind == DEFINITION:
            defs[occ.name].add(occ.line)
        elif occ.kind == POINTER_ASSIGNMENT:
            defs[occ.name].add(occ.line)
            if occ.pointee and occ.pointee != occ.name:
                ptrs[occ.name].add(occ.pointee)
        elif occ.kind == USE:
            uses[occ.name].add(occ.line)
        elif occ.kind == CALL_ARGUMENT:
            uses[occ.name].add(occ.line)
            if occ.call_target:
                cfuncs[occ.name].add((occ.call_target, occ.arg_pos or 1))

    dvars: dict[str, set[str]] = {name: set() for name in order}
    for source, target, _line in fn.dvar_edges:
        if source in dvars and source != target:
            dvars[source].add(target)

    return [
        SliceProfile(
            file=path,
            function=fn.name,
            variable=name,
            def_lines=frozenset(defs[name]),
            use_lines=frozenset(uses[name]),
            dvars=frozenset(dvars[name]),
            ptrs=frozenset(ptrs[name]),
            cfuncs=frozenset(cfuncs[name]),
        )
        for name in order
    ]


def final_pass(
    profiles: list[SliceProfile], units: list[SourceUnit]
) -> tuple[list[SliceProfile], CallGraph]:
    """Resolve inter-procedural links and one-step pointer-alias merges.

    Returns refined profiles (line sets only ever grow) plus the call
    graph mapping each in-corpus callee to its per-position parameter
    profiles.  Call targets not defined in the corpus stay external.
    """
    by_key: dict[Criterion, SliceProfile] = {p.key: p for p in profiles}

    functions: dict[str, list[tuple[str, FunctionUnit]]] = {}
    for unit in units:
        for fn in unit.functions:
            functions.setdefault(fn.name, []).append((unit.path, fn))

    # one-step alias merge: p = &x / p = q unions use information both ways,
    # computed from the original sets so iteration order cannot matter
    extra_use: dict[Criterion, set[int]] = {}
    for profile in profiles:
        for alias in profile.ptrs:
            other = by_key.get((profile.file, profile.function, alias))
            if other is None:
                continue
            extra_use.setdefault(profile.key, set()).update(other.use_lines)
            extra_use.setdefault(other.key, set()).update(profile.use_lines)

    refined: list[SliceProfile] = []
    for profile in profiles:
        extra = extra_use.get(profile.key)
        if extra and not extra.issubset(profile.use_lines):
            profile = replace(profile, use_lines=profile.use_lines | frozenset(extra))
        refined.append(profile)

    return refined, _build_call_graph(refined, functions)


def _build_call_graph(
    profiles: list[SliceProfile],
    functions: dict[str, list[tuple[str, FunctionUnit]]],
) -> CallGraph:
    by_key = {p.key: p for p in profiles}
    graph: CallGraph = {}
    for profile in profiles:
        for callee, pos in profile.cfuncs:
            if callee not in functions:
                continue
            slot = graph.setdefault(callee, {})
            if pos in slot:
                continue
            params = []
            for path, fn in functions[callee]:
                if pos <= len(fn.parameters):
                    key = (path, fn.name, fn.parameters[pos - 1])
                    if key in by_key:
                        params.append(by_key[key])
            if params:
                slot[pos] = params
    return graph


def compose_complete_slice(
    criterion: Criterion,
    profiles: list[SliceProfile] | dict[Criterion, SliceProfile],
    call_graph: CallGraph | None = None,
) -> CompleteSlice:
    """Union the criterion's profile with its dependency closure.

    Expansion is transitive with each profile expanded at most once, so
    mutually recursive call chains terminate.  Lines before the
    criterion's first definition are excluded at the end.
    """
    if isinstance(profiles, dict):
        by_key = profiles
    else:
        by_key = {p.key: p for p in profiles}
    call_graph = call_graph or {}

    root = by_key.get(criterion)
    if root is None:
        raise CriterionNotFoundError(f"no slice profile for {criterion!r}")

    lines: set[int] = set()
    idents: set[str] = set()
    visited: set[Criterion] = set()
    stack: list[SliceProfile] = [root]
    while stack:
        profile = stack.pop()
        if profile.key in visited:
            continue
        visited.add(profile.key)
        lines.update(profile.own_lines())
        idents.update(profile.dvars)
        idents.update(profile.ptrs)
        idents.update(name for name, _pos in profile.cfuncs)
        for name in sorted(profile.dvars | profile.ptrs):
            dep = by_key.get((profile.file, profile.function, name))
            if dep is not None:
                stack.append(dep)
        for callee, pos in sorted(profile.cfuncs):
            for param_profile in call_graph.get(callee, {}).get(pos, []):
                stack.append(param_profile)

    if root.def_lines:
        first_def = min(root.def_lines)
        lines = {ln for ln in lines if ln >= first_def}
    own = {ln for ln in root.own_lines() if ln in lines}
    if not own:
        own = set(root.own_lines()) or {0}
    return CompleteSlice(
        criterion=criterion,
        lines=frozenset(lines),
        contributing_profiles=len(visited),
        unique_identifiers=frozenset(idents),
        span_first=min(own),
        span_last=max(own),
    )


def slice_all(
    units: list[SourceUnit],
) -> tuple[dict[Criterion, CompleteSlice], dict[Criterion, int]]:
    """Profiles, final pass and composition for every variable in a corpus.

    Returns slices keyed by criterion plus each criterion's module size.
    """
    profiles: list[SliceProfile] = []
    module_sizes: dict[Criterion, int] = {}
    for unit in units:
        sizes = {fn.name: fn.module_size for fn in unit.functions}
        for profile in compute_slice_profiles(unit):
            profiles.append(profile)
            module_sizes[profile.key] = sizes[profile.function]
    refined, call_graph = final_pass(profiles, units)
    by_key = {p.key: p for p in refined}
    slices: dict[Criterion, CompleteSlice] = {}
    for key in sorted(by_key):
        slices[key] = compose_complete_slice(key, by_key, call_graph)
    return slices, module_sizes
