import pytest
from hypothesis import given, strategies as st

from semgkit.commands import FrameError, RobotCommand, decode_command, decode_stream, encode_command
from semgkit.core import GestureLabel


def test_examples():
    assert encode_command(GestureLabel.REST) == b"G0\n"
    assert decode_command(b"G4\n") == 4
    with pytest.raises(FrameError) as info:
        decode_command(b"X4\n")
    assert info.value.offset == 0
    assert RobotCommand(GestureLabel.OPEN).bytes == b"G2\n"


@pytest.mark.parametrize("frame, offset", [(b"G7\n", 1), (b"G4\r", 2), (b"G4", 2),
                                           (b"Ga\n", 1)])
def test_malformed_frames(frame, offset):
    with pytest.raises(FrameError) as info:
        decode_command(frame)
    assert info.value.offset == offset


def test_stream_error_offset_is_absolute():
    with pytest.raises(FrameError) as info:
        decode_stream(b"G1\nG2\nQ3\n")
    assert info.value.offset == 6
    with pytest.raises(FrameError):
        decode_stream(b"G1\nG2")


def test_encode_rejects_unknown_gesture():
    with pytest.raises(ValueError):
        encode_command(9)


@given(st.lists(st.integers(0, 6), max_size=200))
def test_concatenated_frames_decode(seq):
    data = b"".join(encode_command(g) for g in seq)
    assert decode_stream(data) == seq
    # each frame ends in the only 0x0a byte it holds, so splitting on it resynchronises
    assert data.count(b"\n") == len(seq)
