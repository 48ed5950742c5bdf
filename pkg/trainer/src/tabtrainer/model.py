"""Small convolutional per-string fret classifier."""
from __future__ import annotations

import torch
from torch import nn

from .features import CONTEXT, N_BINS

N_STRINGS = 6


class FretNet(nn.Module):
    """Conv stack over a (bins x context) patch; one softmax head per string."""

    def __init__(self, n_classes: int):
        super().__init__()
        self.n_classes = n_classes
        self.body = nn.Sequential(
            nn.Conv2d(1, 8, kernel_size=3), nn.ReLU(),
            nn.Conv2d(8, 16, kernel_size=3), nn.ReLU(),
            nn.MaxPool2d(kernel_size=(2, 1)),
            nn.Dropout(0.25),
            nn.Flatten(),
        )
        with torch.no_grad():
            probe = self.body(torch.zeros(1, 1, N_BINS, CONTEXT))
        self.head = nn.Sequential(
            nn.Linear(probe.shape[1], 128), nn.ReLU(),
            nn.Dropout(0.5),
            nn.Linear(128, N_STRINGS * n_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        logits = self.head(self.body(x))
        return logits.view(-1, N_STRINGS, self.n_classes)
