import io
import struct

import numpy as np
import pytest

from pargrid.exceptions import FrameError
from pargrid.transport.codec import HEADER, ElemKind, decode_frame, encode_frame, read_frame


class TestEncodeFrame:
    def test_header_layout_for_f64_vector(self):
        frame = encode_frame(3, 7, np.array([1.0, 2.0]))

        assert HEADER.size == 21
        assert struct.unpack(">IIIBII", frame[:21]) == (16, 7, 3, 1, 1, 2)
        assert frame[21:] == struct.pack("<dd", 1.0, 2.0)

    def test_complex_payload_is_re_im_pairs(self):
        frame = encode_frame(0, 1, np.array([[1 + 2j], [3 - 4j]]))

        length, _, _, kind, rows, cols = HEADER.unpack_from(frame)
        assert (length, kind, rows, cols) == (32, ElemKind.C128, 2, 1)
        assert frame[21:] == struct.pack("<dddd", 1.0, 2.0, 3.0, -4.0)

    def test_bytes_payload(self):
        frame = encode_frame(1, 2, b"c2r")

        assert HEADER.unpack_from(frame) == (3, 2, 1, 0, 1, 3)
        assert frame[21:] == b"c2r"

    def test_integers_travel_as_f64(self):
        message = decode_frame(encode_frame(0, 0, [1, 2, 3]))

        assert message.kind is ElemKind.F64
        assert message.data.dtype == np.float64
        np.testing.assert_array_equal(message.vector(), [1.0, 2.0, 3.0])

    def test_scalar_becomes_one_by_one(self):
        assert decode_frame(encode_frame(0, 0, 3.5)).shape == (1, 1)

    def test_rejects_three_dimensional_payload(self):
        with pytest.raises(FrameError):
            encode_frame(0, 0, np.zeros((2, 2, 2)))

    def test_rejects_tag_outside_u32(self):
        with pytest.raises(FrameError):
            encode_frame(0, 1 << 32, b"")

    def test_rejects_object_payload(self):
        with pytest.raises(FrameError):
            encode_frame(0, 0, np.array(["a", "b"]))


class TestDecodeFrame:
    def test_matrix_keeps_row_major_shape(self):
        matrix = np.arange(6, dtype=np.float64).reshape(2, 3)
        message = decode_frame(encode_frame(2, 9, matrix))

        assert (message.source, message.tag, message.kind) == (2, 9, ElemKind.F64)
        np.testing.assert_array_equal(message.data, matrix)

    def test_empty_matrix(self):
        message = decode_frame(encode_frame(0, 0, np.zeros((0, 4))))

        assert message.shape == (0, 4)

    def test_text_and_vector_helpers(self):
        assert decode_frame(encode_frame(0, 0, "héllo".encode("utf-8"))).text() == "héllo"
        with pytest.raises(FrameError):
            decode_frame(encode_frame(0, 0, b"abc")).vector()
        with pytest.raises(FrameError):
            decode_frame(encode_frame(0, 0, [1.0])).text()

    def test_short_frame(self):
        with pytest.raises(FrameError, match="shorter than its header"):
            decode_frame(b"\x00" * 10)

    def test_unknown_kind(self):
        frame = HEADER.pack(0, 0, 0, 7, 0, 0)
        with pytest.raises(FrameError, match="unknown element kind"):
            decode_frame(frame)

    def test_length_disagrees_with_payload(self):
        frame = encode_frame(0, 0, [1.0, 2.0])
        with pytest.raises(FrameError):
            decode_frame(frame[:-8])

    def test_length_disagrees_with_shape(self):
        body = struct.pack("<dd", 1.0, 2.0)
        frame = HEADER.pack(len(body), 0, 0, int(ElemKind.F64), 3, 1) + body
        with pytest.raises(FrameError, match="inconsistent"):
            decode_frame(frame)


class TestReadFrame:
    def test_reads_consecutive_frames_then_eof(self):
        first = encode_frame(0, 1, [1.0])
        second = encode_frame(1, 2, b"xyz")
        stream = io.BytesIO(first + second)

        assert read_frame(stream) == first
        assert read_frame(stream) == second
        assert read_frame(stream) is None

    def test_truncated_payload(self):
        frame = encode_frame(0, 1, [1.0, 2.0])
        with pytest.raises(FrameError, match="payload bytes"):
            read_frame(io.BytesIO(frame[:-3]))

    def test_truncated_header(self):
        with pytest.raises(FrameError, match="header"):
            read_frame(io.BytesIO(b"\x00\x01"))
