"""Deployment lifecycle state machine shared by the catalogs and the engine."""

from __future__ import annotations

from enum import Enum


class LifecycleState(str, Enum):
    PENDING = "Pending"
    DISCOVERING = "Discovering"
    VALIDATING = "Validating"
    RENDERING = "Rendering"
    DEPLOYING = "Deploying"
    CONFIGURING = "Configuring"
    AFFILIATING = "Affiliating"
    RUNNING = "Running"
    DELETING = "Deleting"
    DELETED = "Deleted"
    ABORTED = "Aborted"

    @property
    def is_terminal(self) -> bool:
        return self in (LifecycleState.DELETED, LifecycleState.ABORTED)


#: The happy-path pipeline, in order.
PIPELINE_ORDER: tuple[LifecycleState, ...] = (
    LifecycleState.PENDING,
    LifecycleState.DISCOVERING,
    LifecycleState.VALIDATING,
    LifecycleState.RENDERING,
    LifecycleState.DEPLOYING,
    LifecycleState.CONFIGURING,
    LifecycleState.AFFILIATING,
    LifecycleState.RUNNING,
    LifecycleState.DELETING,
    LifecycleState.DELETED,
)

#: States from which a pipeline may still bail out.
_PRE_RUNNING = PIPELINE_ORDER[: PIPELINE_ORDER.index(LifecycleState.RUNNING)]

ALLOWED_TRANSITIONS: dict[LifecycleState, frozenset[LifecycleState]] = {
    state: frozenset() for state in LifecycleState
}
for _i, _state in enumerate(PIPELINE_ORDER[:-1]):
    _next = {PIPELINE_ORDER[_i + 1]}
    if _state in _PRE_RUNNING:
        _next.add(LifecycleState.ABORTED)
    ALLOWED_TRANSITIONS[_state] = frozenset(_next)


class InvalidTransitionError(Exception):
    """A lifecycle transition outside the allowed edges was requested."""

    def __init__(self, current: LifecycleState, target: LifecycleState):
        super().__init__(f"invalid lifecycle transition {current.value} -> {target.value}")
        self.current = current
        self.target = target


def can_transition(current: LifecycleState, target: LifecycleState) -> bool:
    return target in ALLOWED_TRANSITIONS[current]


def check_transition(current: LifecycleState, target: LifecycleState) -> None:
    if not can_transition(current, target):
        raise InvalidTransitionError(current, target)


def advances(current: LifecycleState, target: LifecycleState) -> bool:
    """True when ``target`` is reachable from ``current`` via allowed edges."""
    seen = {current}
    frontier = [current]
    while frontier:
        state = frontier.pop()
        for nxt in ALLOWED_TRANSITIONS[state]:
            if nxt == target:
                return True
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False
