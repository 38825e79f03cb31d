import numpy as np
import pytest

from afdmsim import AfdmConfig, ChannelRealization, ConstellationSpec

# Fixed two-path evaluation channel used by the EXIT analysis and several
# paired-detector tests.
EVAL_GAINS = [1.1 + 0.6j, 0.35 + 0.21j]
EVAL_DELAYS = [0.3, 1.1]
EVAL_DOPPLERS = [0.8, 1.5]


@pytest.fixture(scope="session")
def qpsk():
    return ConstellationSpec.qpsk()


@pytest.fixture(scope="session")
def eval_channel():
    return ChannelRealization.fixed(
        EVAL_GAINS, EVAL_DELAYS, EVAL_DOPPLERS, rolloff=0.4, tap_count=8
    )


@pytest.fixture(scope="session")
def eval_channel_file(tmp_path_factory, eval_channel):
    path = tmp_path_factory.mktemp("channels") / "two_path.txt"
    path.write_text(eval_channel.to_text({"N": 128, "seed": 0}))
    return str(path)


@pytest.fixture(scope="session")
def sys128(qpsk):
    return AfdmConfig.with_default_rule(128, 4, qpsk, block_count=4)


def dense_frame_matrix(n, c1, c2):
    """Independent dense construction of the forward transform."""
    k = np.arange(n)
    chirp1 = np.diag(np.exp(-2j * np.pi * c1 * k * k))
    chirp2 = np.diag(np.exp(-2j * np.pi * c2 * k * k))
    f = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    return chirp2 @ f @ chirp1
