#pragma once

#define SVINT_VERSION "0.1.0"
