"""Exception types shared across the toolkit."""


class GatescopeError(Exception):
    """Base class for all errors raised by gatescope."""


class SourceError(GatescopeError):
    """An error tied to a location in an input file.

    Renders as ``file:line:col: message`` so editors and shell pipelines can
    jump to the offending spot.
    """

    def __init__(self, message, filename="<input>", line=0, col=0):
        self.message = message
        self.filename = filename
        self.line = line
        self.col = col
        super().__init__(f"{filename}:{line}:{col}: {message}")


class LibertyError(SourceError):
    """Gate library text could not be parsed or is semantically invalid."""


class VerilogError(SourceError):
    """Structural Verilog text could not be parsed."""


class UnsupportedConstructError(VerilogError):
    """The input uses a language feature outside the supported subset."""


class FunctionSyntaxError(GatescopeError):
    """A Boolean function string is malformed."""


class EvaluationError(GatescopeError):
    """A Boolean function was evaluated with an incomplete assignment."""


class TooManyVariablesError(GatescopeError):
    """Truth-table construction was asked for more variables than the cap."""


class NetlistError(GatescopeError):
    """Netlist construction or traversal violated a structural rule."""


class UnknownObjectError(NetlistError):
    """Lookup of a gate/net/module/grouping id failed."""


class ConnectionError(NetlistError):
    """A pin/net connection request is invalid (direction, double drive...)."""


class HierarchyError(NetlistError):
    """A module operation would break the module tree."""


class CombinationalCycleError(GatescopeError):
    """A combinational loop was found where acyclic logic was required."""

    def __init__(self, cycle_nets):
        self.cycle_nets = tuple(cycle_nets)
        nets = ", ".join(str(n) for n in self.cycle_nets)
        super().__init__(f"combinational cycle through nets: {nets}")


class ClockingError(GatescopeError):
    """A sequential analysis found unsupported clocking (multiple clocks...)."""


class SimulationError(GatescopeError):
    """Event-driven simulation could not proceed."""


class OscillationError(SimulationError):
    """Zero-delay simulation did not settle within the delta-cycle cap."""

    def __init__(self, time, nets):
        self.time = time
        self.nets = tuple(nets)
        nets_s = ", ".join(str(n) for n in self.nets)
        super().__init__(f"oscillation at t={time} on nets: {nets_s}")


class ProjectFormatError(GatescopeError):
    """A project file is corrupted, has a bad version, or fails validation."""


class WidthCapError(GatescopeError):
    """A word-level candidate exceeds the analyzable width."""


class TaskCancelled(GatescopeError):
    """Raised inside an analysis pass when the owner requested cancellation."""
