# -*- coding: utf-8 -*-
"""Transport-channel audio coding.

The beamformed transport channels are coded independently of each other
("independent channel" mode).  Three coder kinds exist behind one per-frame
interface:

* ``passthrough`` - IEEE-754 float32, bit-exact; the reference for all
  fidelity tests.
* ``uniform`` - per-channel scalar quantization with one float32 scale
  factor per (frame, channel) at a configurable bit depth.
* ``external`` - a child process speaking a small framed stdin/stdout
  protocol, so a real perceptual coder can be attached without code
  changes (see FORMAT.md; a loopback stub ships as ``hoac.stub_coder``).

Every coder consumes and produces frames of FRAME_SAMPLES samples per
channel; channel c is never influenced by channel c' != c.
"""
import select
import shlex
import subprocess
from dataclasses import dataclass

import numpy as np

from .stft import FRAME_SAMPLES, SAMPLE_RATE

KIND_PASSTHROUGH = "passthrough"
KIND_UNIFORM = "uniform"
KIND_EXTERNAL = "external"
KINDS = (KIND_PASSTHROUGH, KIND_UNIFORM, KIND_EXTERNAL)

HANDSHAKE_MAGIC = "HOAC-TC1"
EXTERNAL_TIMEOUT_S = 30.0


class TransportCoderError(RuntimeError):
    """Transport coder failure; carries the offending channel index."""

    def __init__(self, message, channel=None):
        super().__init__(message)
        self.channel = channel


@dataclass(frozen=True)
class CoderSpec:
    """Transport coder configuration carried in the stream header.

    kbps_per_channel is the nominal accounting rate (per channel); for the
    uniform kind `bits` sets the actual quantizer depth, for the external
    kind `command` is the child process command line.
    """
    kind: str = KIND_PASSTHROUGH
    kbps_per_channel: float = 0.0
    bits: int = 16
    command: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown coder kind {self.kind!r}")
        if self.kind != KIND_PASSTHROUGH and self.kbps_per_channel < 0:
            raise ValueError("kbps must be >= 0")
        if self.kind == KIND_UNIFORM and not 2 <= self.bits <= 24:
            raise ValueError("uniform quantizer depth must be in [2, 24]")
        if self.kind == KIND_EXTERNAL and not self.command:
            raise ValueError("external coder requires a command")


def make_coder(spec, num_channels, mode):
    """Instantiate a coder; `mode` is 'encode' or 'decode'."""
    if mode not in ("encode", "decode"):
        raise ValueError("mode must be 'encode' or 'decode'")
    if spec.kind == KIND_PASSTHROUGH:
        return PassthroughCoder(num_channels)
    if spec.kind == KIND_UNIFORM:
        return UniformCoder(num_channels, spec.bits)
    return ExternalCoder(num_channels, spec, mode)


class PassthroughCoder:
    """Float32 channel-major frames, bit-exact round trip."""

    latency = 0

    def __init__(self, num_channels):
        self.num_channels = num_channels

    def encode_frame(self, pcm):
        pcm = np.ascontiguousarray(pcm, dtype=np.float32)
        if pcm.shape != (self.num_channels, FRAME_SAMPLES):
            raise ValueError("bad transport frame shape")
        return pcm.tobytes()

    def decode_frame(self, payload):
        expected = self.num_channels * FRAME_SAMPLES * 4
        if len(payload) != expected:
            raise TransportCoderError(
                f"payload size {len(payload)} != expected {expected}")
        arr = np.frombuffer(payload, dtype=np.float32)
        return arr.reshape(self.num_channels, FRAME_SAMPLES).astype(float)

    def close(self):
        pass


class UniformCoder:
    """Scalar quantization with per-(frame, channel) float32 scale factors."""

    latency = 0

    def __init__(self, num_channels, bits):
        self.num_channels = num_channels
        self.bits = int(bits)

    def encode_frame(self, pcm):
        pcm = np.asarray(pcm, dtype=float)
        if pcm.shape != (self.num_channels, FRAME_SAMPLES):
            raise ValueError("bad transport frame shape")
        qmax = (1 << (self.bits - 1)) - 1
        scales = np.max(np.abs(pcm), axis=1).astype(np.float32)
        safe = np.where(scales > 0, scales, 1.0).astype(np.float32)
        q = np.round(pcm / safe[:, None] * qmax).astype(np.int64) + qmax
        bits = np.empty((self.num_channels, FRAME_SAMPLES, self.bits),
                        dtype=np.uint8)
        for b in range(self.bits):
            bits[:, :, b] = (q >> (self.bits - 1 - b)) & 1
        return scales.tobytes() + np.packbits(bits.ravel()).tobytes()

    def decode_frame(self, payload):
        qmax = (1 << (self.bits - 1)) - 1
        head = self.num_channels * 4
        nbits = self.num_channels * FRAME_SAMPLES * self.bits
        expected = head + (nbits + 7) // 8
        if len(payload) != expected:
            raise TransportCoderError(
                f"payload size {len(payload)} != expected {expected}")
        scales = np.frombuffer(payload[:head], dtype=np.float32)
        raw = np.unpackbits(np.frombuffer(payload[head:], dtype=np.uint8),
                            count=nbits)
        raw = raw.reshape(self.num_channels, FRAME_SAMPLES, self.bits)
        q = np.zeros((self.num_channels, FRAME_SAMPLES), dtype=np.int64)
        for b in range(self.bits):
            q |= raw[:, :, b].astype(np.int64) << (self.bits - 1 - b)
        return (q - qmax) / qmax * scales[:, None].astype(float)

    def close(self):
        pass


class ExternalCoder:
    """Child-process coder over the framed stdin/stdout wire protocol.

    One process serves all channels of one stream; each frame is exchanged
    channel by channel so that errors can name the channel and channel
    independence is enforced by construction.
    """

    def __init__(self, num_channels, spec, mode,
                 timeout=EXTERNAL_TIMEOUT_S):
        self.num_channels = num_channels
        self.mode = mode
        self.timeout = timeout
        try:
            self._proc = subprocess.Popen(
                shlex.split(spec.command),
                stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        except OSError as exc:
            raise TransportCoderError(
                f"cannot start external coder: {exc}") from exc
        hello = (f"{HANDSHAKE_MAGIC} {mode} {SAMPLE_RATE} {num_channels} "
                 f"{spec.kbps_per_channel:g}\n")
        self._proc.stdin.write(hello.encode("ascii"))
        self._proc.stdin.flush()
        reply = self._read_line()
        parts = reply.split()
        if len(parts) != 2 or parts[0] != "OK":
            raise TransportCoderError(
                f"bad external coder handshake reply {reply!r}")
        self.latency = int(parts[1])

    def encode_frame(self, pcm):
        pcm = np.ascontiguousarray(pcm, dtype=np.float32)
        if pcm.shape != (self.num_channels, FRAME_SAMPLES):
            raise ValueError("bad transport frame shape")
        chunks = []
        for c in range(self.num_channels):
            coded = self._exchange(pcm[c].tobytes(), c)
            chunks.append(len(coded).to_bytes(4, "little") + coded)
        return b"".join(chunks)

    def decode_frame(self, payload):
        out = np.zeros((self.num_channels, FRAME_SAMPLES))
        pos = 0
        for c in range(self.num_channels):
            if pos + 4 > len(payload):
                raise TransportCoderError("truncated transport payload",
                                          channel=c)
            ln = int.from_bytes(payload[pos:pos + 4], "little")
            pos += 4
            if pos + ln > len(payload):
                raise TransportCoderError("truncated transport payload",
                                          channel=c)
            pcm = self._exchange(payload[pos:pos + ln], c)
            pos += ln
            if len(pcm) != FRAME_SAMPLES * 4:
                raise TransportCoderError(
                    f"external coder returned {len(pcm)} bytes of PCM",
                    channel=c)
            out[c] = np.frombuffer(pcm, dtype=np.float32)
        if pos != len(payload):
            raise TransportCoderError("trailing bytes in transport payload")
        return out

    def _exchange(self, blob, channel):
        proc = self._proc
        if proc.poll() is not None:
            raise TransportCoderError("external coder exited early",
                                      channel=channel)
        try:
            proc.stdin.write(len(blob).to_bytes(4, "little") + blob)
            proc.stdin.flush()
            header = self._read_exact(4, channel)
            ln = int.from_bytes(header, "little")
            return self._read_exact(ln, channel)
        except (BrokenPipeError, OSError) as exc:
            raise TransportCoderError(f"external coder failed: {exc}",
                                      channel=channel) from exc

    def _read_exact(self, n, channel=None):
        buf = b""
        fd = self._proc.stdout.fileno()
        while len(buf) < n:
            ready, _, _ = select.select([fd], [], [], self.timeout)
            if not ready:
                raise TransportCoderError("external coder timeout",
                                          channel=channel)
            chunk = self._proc.stdout.read(n - len(buf))
            if not chunk:
                raise TransportCoderError("external coder closed its pipe",
                                          channel=channel)
            buf += chunk
        return buf

    def _read_line(self):
        buf = b""
        while not buf.endswith(b"\n"):
            ready, _, _ = select.select([self._proc.stdout.fileno()], [], [],
                                        self.timeout)
            if not ready:
                raise TransportCoderError("external coder handshake timeout")
            ch = self._proc.stdout.read(1)
            if not ch:
                raise TransportCoderError("external coder closed its pipe")
            buf += ch
        return buf.decode("ascii", "replace").strip()

    def close(self):
        proc = self._proc
        if proc.poll() is None:
            try:
                proc.stdin.write((0).to_bytes(4, "little"))
                proc.stdin.flush()
                proc.stdin.close()
                proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                proc.kill()
