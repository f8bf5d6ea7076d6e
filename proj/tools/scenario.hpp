#pragma once
// placeholder until the CLI lands
