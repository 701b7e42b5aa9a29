# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Readers and writers for snapshots, images and CSV tables."""
