# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Run configuration, orchestration, verification and sweeps."""
