# __init__.py
# Part of MagVlasov
#
# See LICENSE file for copyright and license details
