# Copyright 2026 The aec-toolkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Reference computations (NumPy) whose outputs are frozen into the C++ tests.

Run `python3 tests/oracle_gen.py` and paste the printed constants next to the
matching EXPECT lines.  Keep this file in sync when frame geometry changes.
"""
import numpy as np

SR = 16000
WIN = 400
HOP = 160
NFFT = 512


def hann_periodic(n):
    k = np.arange(n)
    return 0.5 - 0.5 * np.cos(2 * np.pi * k / n)


def stft_frame(x, start):
    w = hann_periodic(WIN)
    frame = np.zeros(NFFT)
    frame[:WIN] = x[start:start + WIN] * w
    return np.fft.rfft(frame)


def main():
    print("# 1 kHz sine, frame 10 (start sample 1600)")
    n = np.arange(SR, dtype=np.float64)
    sine = np.sin(2 * np.pi * 1000.0 * n / SR)
    spec = stft_frame(sine, 10 * HOP)
    mags = np.abs(spec)
    print("argmax bin:", int(np.argmax(mags)))
    print("mag[32]: %.9f" % mags[32])
    print("mag[31]: %.9f" % mags[31])
    print("re[32]: %.9f  im[32]: %.9f" % (spec[32].real, spec[32].imag))

    print("\n# HTK mel scale")
    for f in (125.0, 700.0, 1000.0, 7600.0):
        print("hz_to_mel(%g) = %.9f" % (f, 1127.0 * np.log1p(f / 700.0)))

    print("\n# mel channel centers (80 channels, 125..7600 Hz)")
    lo = 1127.0 * np.log1p(125.0 / 700.0)
    hi = 1127.0 * np.log1p(7600.0 / 700.0)
    step = (hi - lo) / 81.0
    for m in (0, 20, 40, 60, 79):
        mel = lo + (m + 1) * step
        print("center(%d) = %.9f Hz" % (m, 700.0 * (np.exp(mel / 1127.0) - 1.0)))

    print("\n# brute-force cross-correlation r[k] = sum a[n] b[n-k], k in [-3,3]")
    a = np.array([1.0, -2.0, 3.0, 0.5, -1.5, 2.5, 0.0, 1.0])
    b = np.array([0.5, 1.0, -1.0, 2.0, 0.0, -0.5, 1.5, 0.25])
    for k in range(-3, 4):
        r = 0.0
        for i in range(len(a)):
            j = i - k
            if 0 <= j < len(b):
                r += a[i] * b[j]
        print("r[%+d] = %.9f" % (k, r))

    print("\n# windowed-frame energy constant: full-spectrum energy / frame energy")
    rng = np.random.default_rng(7)
    x = rng.standard_normal(WIN)
    w = hann_periodic(WIN)
    frame = np.zeros(NFFT)
    frame[:WIN] = x * w
    full = np.fft.fft(frame)
    print("ratio = %.9f (expect NFFT = %d)" % (
        np.sum(np.abs(full) ** 2) / np.sum(frame ** 2), NFFT))


if __name__ == "__main__":
    main()


def lstm_cell_oracle():
    """Frozen reference for the fused LSTM cell, gate order [i, f, g, o]."""
    x = np.array([0.5, -1.0])
    h_prev = np.array([0.1, -0.2])
    c_prev = np.array([0.3, 0.2])
    w_ih = np.array([
        [0.1, 0.2], [-0.3, 0.4], [0.5, -0.6], [0.7, 0.8],
        [-0.1, 0.3], [0.2, -0.2], [0.4, 0.1], [-0.5, 0.6]])
    w_hh = np.array([
        [0.2, -0.1], [0.3, 0.2], [-0.4, 0.5], [0.1, -0.3],
        [0.6, 0.2], [-0.2, 0.4], [0.3, 0.3], [0.1, -0.1]])
    b = np.array([0.01, -0.02, 0.03, 0.04, -0.05, 0.06, 0.07, -0.08])
    z = w_ih @ x + w_hh @ h_prev + b
    sig = lambda v: 1.0 / (1.0 + np.exp(-v))
    i, f = sig(z[0:2]), sig(z[2:4])
    g, o = np.tanh(z[4:6]), sig(z[6:8])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    print("lstm z =", np.array2string(z, precision=9))
    print("lstm c =", np.array2string(c, precision=9))
    print("lstm h =", np.array2string(h, precision=9))


def adam_oracle():
    """Three constant-gradient steps with bias correction."""
    p = np.array([1.0, -2.0])
    g = np.array([0.5, -1.5])
    m = np.zeros(2)
    v = np.zeros(2)
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    for t in range(1, 4):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** t)
        vhat = v / (1 - b2 ** t)
        p = p - lr * mhat / (np.sqrt(vhat) + eps)
    print("adam p after 3 steps =", np.array2string(p, precision=9))


lstm_cell_oracle()
adam_oracle()
