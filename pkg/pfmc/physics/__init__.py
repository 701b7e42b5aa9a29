# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Double-well potentials, profiles and the fields built from them."""
