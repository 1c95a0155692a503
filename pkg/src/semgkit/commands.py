"""Three-byte serial frames carrying one gesture decision to the arm controller.

Frame layout: ``b'G'``, the ASCII digit of the gesture id, ``b'\\n'``.
"""

from dataclasses import dataclass

from .core import N_GESTURES, GestureLabel

FRAME_START = 0x47   # 'G'
FRAME_END = 0x0A     # '\n'
FRAME_LEN = 3


class FrameError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


def encode_command(g) -> bytes:
    g = GestureLabel(int(g))
    return bytes((FRAME_START, 0x30 + int(g), FRAME_END))


def decode_command(frame: bytes, offset: int = 0) -> GestureLabel:
    """Inverse of :func:`encode_command`; ``offset`` is only used in error messages."""
    frame = bytes(frame)
    if len(frame) != FRAME_LEN:
        raise FrameError(f"frame must be {FRAME_LEN} bytes, got {len(frame)}",
                         offset + min(len(frame), FRAME_LEN))
    if frame[0] != FRAME_START:
        raise FrameError(f"expected start byte 0x47, got {frame[0]:#04x}", offset)
    digit = frame[1] - 0x30
    if not 0 <= digit < N_GESTURES:
        raise FrameError(f"invalid gesture digit {frame[1]:#04x}", offset + 1)
    if frame[2] != FRAME_END:
        raise FrameError(f"expected terminator 0x0a, got {frame[2]:#04x}", offset + 2)
    return GestureLabel(digit)


def decode_stream(data: bytes) -> list:
    """Decode back-to-back frames; errors report the absolute byte offset."""
    data = bytes(data)
    if len(data) % FRAME_LEN:
        raise FrameError("truncated trailing frame", len(data) - len(data) % FRAME_LEN)
    return [decode_command(data[k:k + FRAME_LEN], k) for k in range(0, len(data), FRAME_LEN)]


@dataclass(frozen=True)
class RobotCommand:
    gesture: GestureLabel

    @property
    def bytes(self) -> bytes:
        return encode_command(self.gesture)
