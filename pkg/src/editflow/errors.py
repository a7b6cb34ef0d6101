"""Exception hierarchy shared across the harness."""

from __future__ import annotations


class EditFlowError(Exception):
    """Base class for all harness errors."""


# --- corpus -----------------------------------------------------------------

class MergeCommitError(EditFlowError):
    """Commit has more than one parent."""


class MissingParentError(EditFlowError):
    """Commit has no parent (root commit)."""


class EmptyCommitError(EditFlowError):
    """All changed files were skipped (e.g. binary-only diff)."""


class CheckoutFailedError(EditFlowError):
    """Pre-state materialization failed."""


class PatchMismatchError(EditFlowError):
    """Workspace content disagrees with a hunk's pre-change content."""


class AlreadyAppliedError(EditFlowError):
    """Hunk was already applied to this workspace."""


# --- flow graph -------------------------------------------------------------

class IncompleteLabelsError(EditFlowError):
    """A pair label set does not cover every hunk pair."""


class UnknownHunkError(EditFlowError):
    """A hunk id is not a node of the graph under query."""


class EmptyGraphError(EditFlowError):
    """Operation requires a nonempty graph."""


class AmbiguousMatchError(EditFlowError):
    """Two ground-truth hunks matched one prediction (internal error)."""


# --- model gateway ----------------------------------------------------------

class GatewayError(EditFlowError):
    """Base class for provider-side failures."""


class AuthFailureError(GatewayError):
    """Credential rejected by the provider."""


class RateLimitedError(GatewayError):
    """Provider throttled the request and retries were exhausted."""


class MalformedResponseError(GatewayError):
    """Provider response could not be decoded."""


# --- digital twin -----------------------------------------------------------

class SutFailure(EditFlowError):
    """A SUT query failed; recorded in the trace, not raised mid-run."""


# --- metrics ----------------------------------------------------------------

class NoPredictionsError(EditFlowError):
    """Flow statistics requested over traces with zero predictions."""


class SequenceMismatchError(EditFlowError):
    """Observed sequence is not a permutation of the graph's nodes."""
