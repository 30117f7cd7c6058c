// Reference external policy for the wire protocol: replies NOOP to every
// reset/obs message and stays silent after a terminal observation.
// --malformed makes it emit garbage instead, for protocol-error testing.

#include <iostream>
#include <string>

#include <json.hpp>

int main(int argc, char** argv) {
    bool malformed = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--malformed") malformed = true;

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        nlohmann::json msg;
        try {
            msg = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            continue;
        }
        const std::string type = msg.value("type", "");
        if (type == "reset" || (type == "obs" && !msg.value("done", false))) {
            if (malformed) {
                std::cout << "{\"type\":\"act\",\"kind\":\"SPIN\",\"alpha_sign\":3}" << std::endl;
            } else {
                std::cout << "{\"type\":\"act\",\"kind\":\"NOOP\",\"alpha_sign\":0}" << std::endl;
            }
        }
    }
    return 0;
}
