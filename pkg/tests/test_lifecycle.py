"""Lifecycle state machine: pipeline edges, bail-out edges, reachability."""

from __future__ import annotations

import pytest

from ztc.lifecycle import (
    ALLOWED_TRANSITIONS,
    PIPELINE_ORDER,
    InvalidTransitionError,
    LifecycleState,
    advances,
    can_transition,
    check_transition,
)

S = LifecycleState


class TestTransitions:
    def test_happy_path_edges_are_consecutive(self):
        for current, target in zip(PIPELINE_ORDER, PIPELINE_ORDER[1:]):
            assert can_transition(current, target)

    def test_no_skipping_ahead(self):
        assert not can_transition(S.PENDING, S.VALIDATING)
        assert not can_transition(S.DISCOVERING, S.RUNNING)
        assert not can_transition(S.PENDING, S.DELETED)

    def test_no_going_backwards(self):
        assert not can_transition(S.VALIDATING, S.DISCOVERING)
        assert not can_transition(S.RUNNING, S.PENDING)

    def test_every_pre_running_state_can_abort(self):
        running_index = PIPELINE_ORDER.index(S.RUNNING)
        for state in PIPELINE_ORDER[:running_index]:
            assert can_transition(state, S.ABORTED), state

    def test_running_and_later_cannot_abort(self):
        for state in (S.RUNNING, S.DELETING, S.DELETED, S.ABORTED):
            assert not can_transition(state, S.ABORTED)

    def test_terminal_states_have_no_outgoing_edges(self):
        assert ALLOWED_TRANSITIONS[S.DELETED] == frozenset()
        assert ALLOWED_TRANSITIONS[S.ABORTED] == frozenset()
        assert S.DELETED.is_terminal and S.ABORTED.is_terminal
        assert not S.RUNNING.is_terminal

    def test_check_transition_raises_with_context(self):
        with pytest.raises(InvalidTransitionError) as err:
            check_transition(S.RUNNING, S.PENDING)
        assert err.value.current is S.RUNNING
        assert err.value.target is S.PENDING


class TestAdvances:
    def test_forward_reachability(self):
        assert advances(S.PENDING, S.RUNNING)
        assert advances(S.PENDING, S.ABORTED)
        assert advances(S.RUNNING, S.DELETED)

    def test_not_reflexive(self):
        for state in LifecycleState:
            assert not advances(state, state)

    def test_backward_never_advances(self):
        assert not advances(S.RUNNING, S.PENDING)
        assert not advances(S.DELETED, S.RUNNING)
        assert not advances(S.ABORTED, S.DELETED)

    def test_aborted_unreachable_from_running(self):
        assert not advances(S.RUNNING, S.ABORTED)
        assert not advances(S.DELETING, S.ABORTED)
