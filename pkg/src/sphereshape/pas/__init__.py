"""Probabilistic amplitude shaping link with the 802.11 convolutional code."""

from .conv import LLRFrame, conv_encode, input_select, viterbi_decode
from .link import PASConfig, PASLink, awgn_add, llr_demap, pas_receive, pas_transmit
from .sim import FERPoint, fer_sim, snr_at_fer
