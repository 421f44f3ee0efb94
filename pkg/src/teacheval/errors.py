"""Exception hierarchy shared across the service.

Every exception carries a stable machine-readable ``code``; the HTTP layer
maps each code to exactly one status.
"""


class EvalError(Exception):
    """Base class for all service errors."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)


class ParseError(EvalError):
    """Input document could not be parsed."""

    code = "parse_error"


class ValidationError(EvalError):
    """Input document parsed but violates a structural invariant."""

    code = "validation_error"


class IndexOutOfRange(EvalError):
    """Item index outside 1..N."""

    code = "index_out_of_range"


class OutOfRange(EvalError):
    """Numeric value outside its permitted interval."""

    code = "out_of_range"


class InvalidValue(EvalError):
    """Response value is not an integer in 1..5."""

    code = "invalid_value"


class IncompleteAnswers(EvalError):
    """Answer list shorter than the questionnaire."""

    code = "incomplete_answers"


class EvaluationInactive(EvalError):
    """The evaluation is not currently open."""

    code = "evaluation_inactive"


class IpNotAllowed(EvalError):
    """Client address is not on the allowlist."""

    code = "ip_not_allowed"


class SessionAlreadyActiveForIp(EvalError):
    """An unfinished session already exists for this address."""

    code = "session_active_for_ip"


class SessionNotActive(EvalError):
    """Session is completed, aborted, or otherwise not answerable."""

    code = "session_not_active"


class UnknownToken(EvalError):
    """No session with that token."""

    code = "unknown_token"


class OutOfOrder(EvalError):
    """Answer submitted for an index other than the current question."""

    code = "out_of_order"


class BankMismatch(EvalError):
    """Record was produced under a different question bank."""

    code = "bank_mismatch"


class NotFound(EvalError):
    """Referenced record does not exist."""

    code = "not_found"


class UnknownTeacher(EvalError):
    """Referenced teacher does not exist."""

    code = "unknown_teacher"


class UnknownUnit(EvalError):
    """Organizational unit not present in the org map."""

    code = "unknown_unit"


class TeacherInUse(EvalError):
    """Teacher is selected in the active evaluation state."""

    code = "teacher_in_use"


class InvalidPhoto(EvalError):
    """Photo payload is not an acceptable JPEG."""

    code = "invalid_photo"


class InvalidIpEntry(EvalError):
    """Allowlist entry is not a parseable IP address."""

    code = "invalid_ip"


class NoTeacherSelected(EvalError):
    """Activation requires a selected teacher."""

    code = "no_teacher_selected"


class AccessDenied(EvalError):
    """Caller's role does not permit this read."""

    code = "access_denied"


class Unauthenticated(EvalError):
    """Missing or bad credentials."""

    code = "unauthenticated"


class AlreadyExists(EvalError):
    """Record exists and overwrite was not forced."""

    code = "already_exists"


class StoreLocked(EvalError):
    """Another process holds the data directory."""

    code = "store_locked"
