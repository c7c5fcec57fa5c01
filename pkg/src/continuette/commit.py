"""Must-analysis proving every declared commitment is discharged on every
normal path.

The transfer function adds the commitments a statement discharges; joins
intersect. Discharges only inside loop bodies never reach the loop-exit fact
(the zero-iteration bypass edge), mirroring definite-assignment conservatism.
`throw`-terminated paths are exempt; the runtime poisons those.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ast_nodes import (
    Block, CallStmt, CommitmentSpec, Ident, If, MethodDecl, SendStmt, Stmt,
    While,
)
from .cfg import BasicBlock, Cfg, build_cfg
from .diagnostics import Diagnostic, Span
from .sema import ResolvedProgram

E_COMMIT_UNDISCHARGED = "E_COMMIT_UNDISCHARGED"
E_PASSTHROUGH_NOT_FINAL = "E_PASSTHROUGH_NOT_FINAL"
E_PASSTHROUGH_ARG = "E_PASSTHROUGH_ARG"
E_LOOP_ONLY_DISCHARGE = "E_LOOP_ONLY_DISCHARGE"


@dataclass(frozen=True)
class CommitError:
    code: str
    span: Span
    method: str
    commitment: str  # target name of the offending commitment
    message: str
    path_witness: Optional[tuple[str, ...]] = None  # branch choices to a bad exit

    def to_diagnostic(self) -> Diagnostic:
        return Diagnostic(self.code, self.span, self.message)


def effectively_final(method: MethodDecl, param) -> bool:
    """True iff the param is declared final or never assigned in the body."""
    return param.is_final or not _assigned(method.body, param)


def _assigned(block: Block, param) -> bool:
    from .ast_nodes import Assign
    for st in block.stmts:
        if isinstance(st, Assign) and isinstance(st.lvalue, Ident) \
                and st.lvalue.binding is param:
            return True
        if isinstance(st, If):
            if _assigned(st.then_block, param):
                return True
            if st.else_block is not None and _assigned(st.else_block, param):
                return True
        elif isinstance(st, While):
            if _assigned(st.body, param):
                return True
        elif isinstance(st, Block):
            if _assigned(st, param):
                return True
    return False


def discharges(stmt, commitment: CommitmentSpec, method: MethodDecl) -> bool:
    """Does this call/send statement discharge the commitment?

    Direct: the invoked target is the commitment's target and every
    pass-through position is fed the bare, effectively-final parameter.
    Transitive (one level): the callee's own sends-clause commits to the same
    target and its pass-through positions are fed the required parameters.
    """
    ok, _ = _classify(stmt, commitment, method)
    return ok


def _classify(stmt, commitment: CommitmentSpec, method: MethodDecl):
    """Returns (discharges, near_miss) where near_miss is None or an error
    code for a direct-target invocation with the wrong argument shape."""
    target = stmt.target
    if target is None or commitment.target is None:
        return False, None
    params_by_name = {p.name: p for p in method.params}
    args = stmt.full_args
    if target is commitment.target:
        if len(args) != len(commitment.params):
            return False, None
        for i in commitment.pass_through or []:
            pname = commitment.params[i].name
            arg = args[i]
            if not (isinstance(arg, Ident) and arg.name == pname):
                return False, E_PASSTHROUGH_ARG
            if not effectively_final(method, params_by_name[pname]):
                return False, E_PASSTHROUGH_NOT_FINAL
        return True, None
    # transitive: target's own sends-clause carries the same commitment
    for cc in target.sends:
        if cc.target is not commitment.target:
            continue
        if len(cc.params) != len(commitment.params):
            continue
        if any(a.type_name != b.type_name
               for a, b in zip(cc.params, commitment.params)):
            continue
        callee_params = {p.name: j for j, p in enumerate(target.params)}
        ok = True
        for i in commitment.pass_through or []:
            if i not in (cc.pass_through or []):
                ok = False
                break
            j = callee_params[cc.params[i].name]
            if j >= len(args):
                ok = False
                break
            arg = args[j]
            pname = commitment.params[i].name
            if not (isinstance(arg, Ident) and arg.name == pname
                    and effectively_final(method, params_by_name[pname])):
                ok = False
                break
        if ok:
            return True, None
    return False, None


@dataclass
class MethodAnalysis:
    cfg: Cfg
    exit_fact: frozenset  # commitment indices must-discharged at normal exit
    errors: list[CommitError]
    fact_changes: int
    change_bound: int


def check_commitments(resolved: ResolvedProgram) -> list[CommitError]:
    """Run the must-analysis over every method with a sends-clause."""
    errors: list[CommitError] = []
    for _, method in resolved.methods():
        if method.sends:
            errors.extend(analyze_method(method).errors)
    return errors


def analyze_method(method: MethodDecl) -> MethodAnalysis:
    cfg = build_cfg(method)
    n = len(method.sends)
    full = frozenset(range(n))

    # per-block gen sets and per-commitment near-miss/discharge site lists
    gen: dict[int, frozenset] = {}
    near_miss: dict[int, list] = {i: [] for i in range(n)}  # (code, stmt)
    discharge_sites: dict[int, list] = {i: [] for i in range(n)}  # (stmt, block)
    for b in cfg.body_blocks:
        got = set()
        for st in b.stmts:
            if not isinstance(st, (CallStmt, SendStmt)):
                continue
            for i, c in enumerate(method.sends):
                ok, miss = _classify(st, c, method)
                if ok:
                    got.add(i)
                    discharge_sites[i].append((st, b))
                elif miss is not None:
                    near_miss[i].append((miss, st))
        gen[id(b)] = frozenset(got)

    # forward must-analysis; optimistic init, intersection join
    out: dict[int, frozenset] = {id(b): full for b in cfg.blocks}
    out[id(cfg.entry)] = gen[id(cfg.entry)]
    preds: dict[int, list[BasicBlock]] = {id(b): [] for b in cfg.blocks}
    for b in cfg.blocks:
        for _, nxt in b.succs:
            preds[id(nxt)].append(b)
    changes = 0
    bound = max(1, len(cfg.body_blocks)) * max(1, n)
    changed = True
    while changed:
        changed = False
        for b in cfg.body_blocks:
            if b is cfg.entry:
                continue
            if preds[id(b)]:
                in_fact = frozenset.intersection(*[out[id(p)] for p in preds[id(b)]])
            else:
                in_fact = full
            new_out = in_fact | gen[id(b)]
            if new_out != out[id(b)]:
                assert new_out < out[id(b)], "must-facts may only shrink"
                out[id(b)] = new_out
                changes += 1
                changed = True
        assert changes <= bound, (
            f"fixpoint exceeded {bound} fact changes in {method.name}")

    exit_preds = preds[id(cfg.exit)]
    exit_fact = (frozenset.intersection(*[out[id(p)] for p in exit_preds])
                 if exit_preds else full)

    errors: list[CommitError] = []
    for i, c in enumerate(method.sends):
        if i in exit_fact:
            continue
        if near_miss[i]:
            code, st = near_miss[i][0]
            errors.append(CommitError(
                code, st.span, method.name, c.target_name,
                _near_miss_message(code, c, method)))
        elif discharge_sites[i] and all(b.loop_depth > 0
                                        for _, b in discharge_sites[i]):
            st, _ = discharge_sites[i][0]
            errors.append(CommitError(
                E_LOOP_ONLY_DISCHARGE, st.span, method.name, c.target_name,
                f"commitment to {c.target_name!r} is discharged only inside a "
                "loop body; the zero-iteration path leaves it unsatisfied",
                path_witness=_find_witness(cfg, out, gen, i)))
        else:
            errors.append(CommitError(
                E_COMMIT_UNDISCHARGED, method.span, method.name, c.target_name,
                f"method {method.name!r} does not discharge its commitment to "
                f"{c.target_name!r} on every normal path",
                path_witness=_find_witness(cfg, out, gen, i)))
    return MethodAnalysis(cfg, exit_fact, errors, changes, bound)


def _near_miss_message(code: str, c: CommitmentSpec, method: MethodDecl) -> str:
    if code == E_PASSTHROUGH_NOT_FINAL:
        return (f"invocation of {c.target_name!r} cannot discharge "
                f"{method.name!r}'s commitment: a pass-through parameter is "
                "reassigned in the body (not effectively final)")
    return (f"invocation of {c.target_name!r} cannot discharge "
            f"{method.name!r}'s commitment: a pass-through position must be "
            "fed the bare parameter itself")


def _find_witness(cfg: Cfg, out, gen, commitment_idx: int) -> Optional[tuple[str, ...]]:
    """Branch choices along an entry->exit path that never discharges the
    commitment. Exists whenever the must-fact at exit is missing it."""
    # BFS over blocks avoiding any block that discharges the commitment
    start = cfg.entry
    if commitment_idx in gen[id(start)]:
        return None
    parent: dict[int, tuple[BasicBlock, str]] = {}
    seen = {id(start)}
    queue = [start]
    goal = None
    while queue:
        b = queue.pop(0)
        if b.is_exit:
            goal = b
            break
        for label, nxt in b.succs:
            if nxt.is_abnormal or id(nxt) in seen:
                continue
            if not nxt.is_exit and commitment_idx in gen[id(nxt)]:
                continue
            seen.add(id(nxt))
            parent[id(nxt)] = (b, label)
            queue.append(nxt)
    if goal is None:
        return None
    # walk back, collecting branch-choice labels at two-way blocks
    path: list[tuple[BasicBlock, str]] = []
    cur = goal
    while id(cur) in parent:
        pred, label = parent[id(cur)]
        path.append((pred, label))
        cur = pred
    path.reverse()
    return tuple(label for blk, label in path if blk.cond is not None)


def replay_witness(cfg: Cfg, witness: tuple[str, ...]) -> list[Stmt]:
    """Follow the witness's branch choices from entry; return the statements
    executed. This is the straight-line replay used to validate witnesses."""
    choices = list(witness)
    stmts: list[Stmt] = []
    b = cfg.entry
    steps = 0
    while not b.is_exit:
        steps += 1
        assert steps <= 10_000, "witness replay did not terminate"
        stmts.extend(b.stmts)
        if b.is_abnormal:
            raise ValueError("witness reached the abnormal exit")
        if b.cond is not None:
            if not choices:
                raise ValueError("witness ran out of branch choices")
            b = b.succ(choices.pop(0))
        else:
            assert len(b.succs) == 1, "non-branching block must have one successor"
            b = b.succs[0][1]
    return stmts
